use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use courtvec_core::analysis::{analyze, nearest_neighbors, AnalysisReport, Matrix};
use courtvec_core::checkpoint::{save_checkpoint, FORMAT_VERSION};
use courtvec_core::eval::{kl_vs_plays_curve, uniform_baseline, validate_matchups, KlSummary, MatchupScore};
use courtvec_core::ingest::{chronological_split, write_plays, write_registry, PlayFileKind};
use courtvec_core::lineup_opt::{rank_fifth_man, FifthManQuery, FifthManRow};
use courtvec_core::model::ModelConfig;
use courtvec_core::sim::{
    most_common_players, most_frequent_lineups, simulate_series, HeadToHeadRow, Lineup, SeriesResult,
};
use courtvec_core::synth::{generate_plays, plant_generator, LineupSampling, SynthConfig};
use courtvec_core::train::{train, Optimizer, TrainConfig};
use courtvec_core::{EmbeddingModel, Play, PlayerRegistry};
use courtvec_serve::ServiceState;
use serde::Serialize;

use crate::cli::*;
use crate::error::{CliError, CliResult};
use crate::files::*;

fn write_plays_file(path: &Path, plays: &[Play]) -> CliResult<()> {
    write_atomic(path, |w| write_plays(plays, w).map_err(CliError::from))
}

fn write_model(path: &Path, model: &EmbeddingModel) -> CliResult<()> {
    write_atomic(path, |w| save_checkpoint(model, w).map_err(CliError::from))
}

pub fn ingest(args: &IngestArgs) -> CliResult<()> {
    let registry = load_registry(&args.players)?;
    let loaded = load_plays(&args.plays, &registry, args.rules.as_deref())?;
    let total = loaded.plays.len();
    let (train_set, held) = chronological_split(loaded.plays, args.holdout_games)?;
    write_plays_file(&args.out, &train_set)?;
    if let Some(val) = &args.val_out {
        write_plays_file(val, &held)?;
    }
    let source = match loaded.kind {
        PlayFileKind::Normalized => "normalized",
        PlayFileKind::Raw => "raw",
    };
    println!("read {total} plays from a {source} file ({} rows dropped by rules)", loaded.dropped);
    println!("wrote {} plays to {}", train_set.len(), args.out.display());
    if let Some(val) = &args.val_out {
        println!("wrote {} held-out plays to {}", held.len(), val.display());
    }
    Ok(())
}

fn parse_bias(spec: &str) -> CliResult<(u32, Vec<usize>, f64)> {
    let bad = || CliError::Usage(format!("bias {spec:?} is not of the form player:class,class:amount"));
    let mut parts = spec.split(':');
    let (Some(player), Some(classes), Some(amount), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(bad());
    };
    let player = player.trim().parse().map_err(|_| bad())?;
    let classes = classes
        .split(',')
        .map(|c| c.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<Vec<usize>>>()?;
    let amount = amount.trim().parse().map_err(|_| bad())?;
    Ok((player, classes, amount))
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let sampling = match args.lineups {
        Sampling::Uniform => LineupSampling::Uniform,
        Sampling::Zipf => LineupSampling::zipf(),
    };
    let mut config = SynthConfig::new(args.player_count, args.h, args.hidden, args.seed).with_sampling(sampling);
    for spec in &args.biases {
        let (player, classes, amount) = parse_bias(spec)?;
        config = config.with_bias(player, &classes, amount);
    }
    let generator = plant_generator(&config)?;
    let plays = generate_plays(&generator, args.plays, args.games)?;
    write_plays_file(&args.out_plays, &plays)?;
    write_atomic(&args.out_players, |w| write_registry(&generator.roster, w).map_err(CliError::from))?;
    if let Some(path) = &args.truth_out {
        write_model(path, &generator.truth)?;
    }
    println!(
        "generated {} plays over {} games for {} players",
        plays.len(),
        args.games,
        args.player_count
    );
    Ok(())
}

pub fn train_cmd(args: &TrainArgs) -> CliResult<()> {
    let registry = load_registry(&args.players)?;
    let plays = load_plays(&args.plays, &registry, None)?.plays;
    let (train_set, held) = chronological_split(plays, args.holdout_games)?;
    if train_set.is_empty() {
        return Err(CliError::Data("no plays left to train on".into()));
    }
    let config = ModelConfig::new(registry.len(), args.h, args.hidden);
    let mut model = EmbeddingModel::init(config, args.seed)?;
    let optimizer = match args.optimizer {
        OptimizerArg::Adam => Optimizer::adam(),
        OptimizerArg::Sgd => Optimizer::Sgd,
    };
    let tc = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        optimizer,
        seed: args.seed,
        shuffle: true,
    };
    println!("training on {} plays ({} held out)", train_set.len(), held.len());
    let mut losses = String::from("epoch,mean_loss\n");
    let summary = train(&mut model, &train_set, &tc, |r| {
        println!("epoch {:>3}/{}  loss {:.6}", r.epoch + 1, tc.epochs, r.mean_loss);
        writeln!(losses, "{},{}", r.epoch + 1, r.mean_loss).unwrap();
    })?;
    write_model(&args.out, &model)?;
    if let Some(path) = &args.loss_out {
        write_text(path, &losses)?;
    }
    println!("{} optimizer steps; wrote {}", summary.steps, args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalReport<'a> {
    min_plays: usize,
    plays: usize,
    summary: Option<KlSummary>,
    uniform_baseline: Option<KlSummary>,
    matchups: &'a [MatchupScore],
}

fn plays_for_model(path: &Path, players: Option<&Path>, model: &EmbeddingModel) -> CliResult<Vec<Play>> {
    let registry = registry_or_synthetic(players, model.config().vocab)?;
    if registry.len() != model.config().vocab {
        return Err(CliError::Data(format!(
            "registry has {} players but the model has {}",
            registry.len(),
            model.config().vocab
        )));
    }
    Ok(load_plays(path, &registry, None)?.plays)
}

pub fn eval(args: &EvalArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let mut plays = plays_for_model(&args.plays, args.players.as_deref(), &model)?;
    if let Some(n) = args.holdout_games {
        plays = chronological_split(plays, n)?.1;
    }
    let report = validate_matchups(&model, &plays, args.min_plays)?;
    let baseline = uniform_baseline(&plays, args.min_plays)?;
    let out = EvalReport {
        min_plays: args.min_plays,
        plays: plays.len(),
        summary: report.summary,
        uniform_baseline: baseline.summary,
        matchups: &report.matchups,
    };
    match (&report.summary, &baseline.summary) {
        (Some(m), Some(u)) => println!(
            "{} matchups with more than {} plays: mean K-L {:.4} ± {:.4} bits (uniform baseline {:.4} ± {:.4})",
            m.count, args.min_plays, m.mean, m.std_dev, u.mean, u.std_dev
        ),
        _ => println!("no matchup has more than {} plays", args.min_plays),
    }
    match &args.out {
        Some(path) => write_json(path, &out),
        None => {
            print!("{}", to_json(&out));
            Ok(())
        }
    }
}

pub fn eval_curve(args: &EvalCurveArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let plays = plays_for_model(&args.plays, args.players.as_deref(), &model)?;
    let curve = kl_vs_plays_curve(&model, &plays, args.max_n, args.trials, args.seed)?;
    let mut csv = String::from("n,mean_kl\n");
    for p in &curve {
        writeln!(csv, "{},{}", p.n, p.mean_kl_bits).unwrap();
    }
    write_text(&args.out, &csv)?;
    println!("wrote {} curve points to {}", curve.len(), args.out.display());
    Ok(())
}

fn csv_tables(dir: &Path, report: &AnalysisReport, registry: &PlayerRegistry) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let proj: &Matrix = &report.pca.projections;
    let mut t = String::from("id,name,position,cluster");
    for d in 1..=proj.cols() {
        write!(t, ",pc{d}").unwrap();
    }
    t.push('\n');
    for (i, p) in registry.players().iter().enumerate() {
        write!(t, "{},{},{},{}", p.id, p.name, p.position, report.clusters.assignment[i]).unwrap();
        for v in proj.row(i) {
            write!(t, ",{v}").unwrap();
        }
        t.push('\n');
    }
    write_text(&dir.join("projections.csv"), &t)?;

    let mut t = String::from("k,wcss\n");
    for e in &report.elbow {
        writeln!(t, "{},{}", e.k, e.wcss).unwrap();
    }
    write_text(&dir.join("elbow.csv"), &t)?;

    let mut t = String::from("component,explained_variance\n");
    for (d, v) in report.pca.explained_variance.iter().enumerate() {
        writeln!(t, "{},{v}", d + 1).unwrap();
    }
    write_text(&dir.join("variance.csv"), &t)?;

    let mut t = String::from("metric,dimension,n,r,t,p_value,p_bonferroni,significant\n");
    for c in &report.correlations {
        writeln!(
            t,
            "{},{},{},{},{},{},{},{}",
            c.metric, c.dimension, c.n, c.r, c.t, c.p_value, c.p_bonferroni, c.significant
        )
        .unwrap();
    }
    write_text(&dir.join("correlations.csv"), &t)
}

pub fn analyze_cmd(args: &AnalyzeArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let registry = load_registry(&args.players)?;
    let report = analyze(&model, &registry, args.k, args.seed)?;
    write_json(&args.out, &report)?;
    if let Some(dir) = &args.csv_dir {
        csv_tables(dir, &report, &registry)?;
    }
    let var = &report.pca.explained_variance;
    let total: f64 = var.iter().sum();
    println!(
        "PCA: first {} axes explain {:.1}% of variance",
        var.len().min(3),
        100.0 * var.iter().take(3).sum::<f64>() / total
    );
    println!("k-means (k={}): wcss {:.4}", args.k, report.clusters.wcss);
    let significant = report.correlations.iter().filter(|c| c.significant).count();
    println!("{significant} significant metric correlations");
    Ok(())
}

pub fn neighbors(args: &NeighborsArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let registry = registry_or_synthetic(args.players.as_deref(), model.config().vocab)?;
    let id = match args.player.parse::<u32>() {
        Ok(id) => id,
        Err(_) if args.players.is_some() => registry.resolve(&[args.player.as_str()])?[0],
        Err(_) => return Err(CliError::Usage("player names need --players".into())),
    };
    if !registry.contains(id) {
        return Err(courtvec_core::Error::UnknownPlayer(id).into());
    }
    let found = nearest_neighbors(&Matrix::embeddings(&model), id, args.count)?;
    let name = |id: u32| registry.get(id).map(|p| p.name.as_str()).unwrap_or("?");
    println!("nearest to {id} ({}):", name(id));
    for (rank, n) in found.iter().enumerate() {
        println!("{:>3}. {:>6}  {:<24} {:.6}", rank + 1, n.id, name(n.id), n.distance);
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    team_a: &'a str,
    team_b: &'a str,
    lineup_a: &'a Lineup,
    lineup_b: &'a Lineup,
    possessions: usize,
    seed: u64,
    margin_basis: &'static str,
    result: &'a SeriesResult,
    row: String,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let (a, b) = if args.names {
        let registry = load_registry(args.players.as_deref().expect("clap requires --players"))?;
        let names_a = split_names(&args.lineup_a);
        let names_b = split_names(&args.lineup_b);
        let all: Vec<&String> = names_a.iter().chain(&names_b).collect();
        let ids = registry.resolve(&all)?;
        let (ia, ib) = ids.split_at(names_a.len());
        (Lineup::new(ia)?, Lineup::new(ib)?)
    } else {
        (Lineup::new(&parse_ids(&args.lineup_a)?)?, Lineup::new(&parse_ids(&args.lineup_b)?)?)
    };
    let result = simulate_series(&model, &a, &b, args.sims, args.possessions, args.seed)?;
    let row = HeadToHeadRow::from_result(&args.team_a, &args.team_b, &result).render();
    let report = SimulateReport {
        team_a: &args.team_a,
        team_b: &args.team_b,
        lineup_a: &a,
        lineup_b: &b,
        possessions: args.possessions,
        seed: args.seed,
        margin_basis: "mean over games played",
        result: &result,
        row,
    };
    match &args.out {
        Some(path) => {
            write_json(path, &report)?;
            println!("{}", report.row);
            Ok(())
        }
        None => {
            print!("{}", to_json(&report));
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    query: &'a FifthManQuery,
    rows: &'a [FifthManRow],
}

pub fn optimize(args: &OptimizeArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let fixed_four = parse_ids(&args.fixed)?;
    let opponent = parse_ids(&args.opponent)?;
    let candidates = match args.pool.strip_prefix("top:") {
        Some(n) => {
            let n: usize = n
                .parse()
                .map_err(|_| CliError::Usage(format!("--pool {:?}: expected top:N", args.pool)))?;
            let path = args
                .plays
                .as_deref()
                .ok_or_else(|| CliError::Usage("--pool top:N needs --plays".into()))?;
            let plays = plays_for_model(path, None, &model)?;
            most_common_players(&plays, n)
                .into_iter()
                .filter(|id| !fixed_four.contains(id) && !opponent.contains(id))
                .collect()
        }
        None => {
            let path = Path::new(&args.pool);
            let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            parse_ids(&text).map_err(|e| CliError::Data(e.to_string()).within(path))?
        }
    };
    let query = FifthManQuery {
        fixed_four,
        opponent,
        candidates,
        sims: args.sims,
        possessions: args.possessions,
        seed: args.seed,
    };
    let rows = rank_fifth_man(&model, &query)?;
    let report = OptimizeReport { query: &query, rows: &rows };
    println!("{:>4}  {:>9}  {:>7}  {:>15}", "rank", "candidate", "win %", "margin");
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{:>4}  {:>9}  {:>6.1}%  {:>+7.2} ± {:<6.2}",
            i + 1,
            r.candidate,
            100.0 * r.game_win_fraction,
            r.mean_margin,
            r.margin_std
        );
    }
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(())
}

pub fn lineups(args: &LineupsArgs) -> CliResult<()> {
    let registry = match &args.players {
        Some(p) => load_registry(p)?,
        None => {
            return Err(CliError::Usage("lineups needs --players to validate ids".into()));
        }
    };
    let plays = load_plays(&args.plays, &registry, None)?.plays;
    let mut out = std::io::stdout().lock();
    for c in most_frequent_lineups(&plays, args.top) {
        let ids: Vec<String> = c.lineup.ids().iter().map(u32::to_string).collect();
        writeln!(out, "{:>8}  {}", c.count, ids.join(",")).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

pub fn serve(args: &ServeArgs) -> CliResult<()> {
    let model = load_model(&args.model)?;
    let registry = load_registry(&args.players)?;
    let state = Arc::new(ServiceState::new(model, registry)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("serving on http://{}/api/v1 (checkpoint {})", args.bind, state.checkpoint_sha256());
    runtime
        .block_on(courtvec_serve::serve(state, args.bind))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.bind)))
}

pub fn version() {
    println!("courtvec {}", env!("CARGO_PKG_VERSION"));
    println!("checkpoint format {FORMAT_VERSION}");
    println!("target {}-{}", std::env::consts::ARCH, std::env::consts::OS);
}
