mod cli;
mod commands;
mod error;
mod files;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Synth(a) => commands::synth(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Eval(a) => commands::eval(a),
        Command::EvalCurve(a) => commands::eval_curve(a),
        Command::Analyze(a) => commands::analyze_cmd(a),
        Command::Neighbors(a) => commands::neighbors(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::OptimizeFifth(a) => commands::optimize(a),
        Command::Lineups(a) => commands::lineups(a),
        Command::Serve(a) => commands::serve(a),
        Command::Version => {
            commands::version();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let result = files::expand_argfiles(std::env::args_os()).and_then(|args| {
        let cli = match Cli::try_parse_from(args) {
            Ok(cli) => cli,
            Err(e) => {
                let _ = e.print();
                return match e.kind() {
                    ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(()),
                    _ => Err(CliError::Usage(String::new())),
                };
            }
        };
        run(cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string();
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
