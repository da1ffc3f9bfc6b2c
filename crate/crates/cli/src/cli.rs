use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "courtvec", about = "Lineup-matchup embeddings for basketball play-by-play data")]
#[command(after_help = "Arguments may be read from a file with @path (one argument per line).")]
pub struct Cli {
    /// Worker threads for parallel simulation and clustering (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and normalize a play file (normalized or raw feed).
    Ingest(IngestArgs),
    /// Generate a synthetic corpus from a planted model.
    Synth(SynthArgs),
    /// Train an embedding model and write a checkpoint.
    Train(TrainArgs),
    /// Per-matchup K-L divergence of a model against held-out plays.
    Eval(EvalArgs),
    /// Mean K-L divergence as a function of plays per matchup (CSV).
    EvalCurve(EvalCurveArgs),
    /// Standardize, PCA, cluster and correlate the learned embeddings.
    Analyze(AnalyzeArgs),
    /// Nearest players in embedding space.
    Neighbors(NeighborsArgs),
    /// Simulate best-of-7 series between two lineups.
    Simulate(SimulateArgs),
    /// Rank candidate fifth players against an opponent.
    OptimizeFifth(OptimizeArgs),
    /// Most frequent five-player lineups in a play file.
    Lineups(LineupsArgs),
    /// Serve the read-only JSON API.
    Serve(ServeArgs),
    /// Print build metadata.
    Version,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub plays: PathBuf,
    #[arg(long)]
    pub players: PathBuf,
    /// Outcome rules for raw feeds (default: built-in rules).
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Move the last N games to --val-out.
    #[arg(long, default_value_t = 0, requires = "val_out")]
    pub holdout_games: usize,
    #[arg(long)]
    pub val_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Sampling {
    Uniform,
    Zipf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "players", default_value_t = 100)]
    pub player_count: usize,
    #[arg(long, default_value_t = 200_000)]
    pub plays: usize,
    #[arg(long, default_value_t = 500)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub h: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, value_enum, default_value_t = Sampling::Zipf)]
    pub lineups: Sampling,
    /// Style bias `player:class,class:amount`, repeatable.
    #[arg(long = "bias")]
    pub biases: Vec<String>,
    #[arg(long)]
    pub out_plays: PathBuf,
    #[arg(long)]
    pub out_players: PathBuf,
    /// Also write the planted model as a checkpoint.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub plays: PathBuf,
    #[arg(long)]
    pub players: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub h: usize,
    #[arg(long, default_value_t = 128)]
    pub hidden: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 512)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exclude the last N games from training.
    #[arg(long, default_value_t = 0)]
    pub holdout_games: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss table (CSV).
    #[arg(long)]
    pub loss_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub plays: PathBuf,
    /// Registry for validating ids (default: a synthetic registry sized to the model).
    #[arg(long)]
    pub players: Option<PathBuf>,
    #[arg(long, default_value_t = 15)]
    pub min_plays: usize,
    /// Score only the last N games of the file.
    #[arg(long)]
    pub holdout_games: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCurveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub plays: PathBuf,
    #[arg(long)]
    pub players: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    pub max_n: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub players: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write projections, elbow and correlation tables as CSV here.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Player id, or name when --players is given.
    #[arg(long)]
    pub player: String,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long)]
    pub players: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub lineup_a: String,
    #[arg(long)]
    pub lineup_b: String,
    #[arg(long, default_value_t = 1000)]
    pub sims: usize,
    #[arg(long, default_value_t = 100)]
    pub possessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lineups are player names resolved against --players.
    #[arg(long, requires = "players")]
    pub names: bool,
    #[arg(long)]
    pub players: Option<PathBuf>,
    #[arg(long, default_value = "Team A")]
    pub team_a: String,
    #[arg(long, default_value = "Team B")]
    pub team_b: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub fixed: String,
    #[arg(long)]
    pub opponent: String,
    /// A file of candidate ids, or `top:N` for the N most frequent players in --plays.
    #[arg(long)]
    pub pool: String,
    #[arg(long)]
    pub plays: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub sims: usize,
    #[arg(long, default_value_t = 100)]
    pub possessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LineupsArgs {
    #[arg(long)]
    pub plays: PathBuf,
    #[arg(long)]
    pub players: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub players: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}
