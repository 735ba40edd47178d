//! Argument parsing and subcommand dispatch for the `qevo` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qevo_core::rng::{derive_seed, stream};
use qevo_core::{optimize, simulate, StateVector, StrategySet};
use rayon::prelude::*;
use serde_json::json;

use crate::circuit_json::{read_circuit, to_json, write_circuit, CircuitJson};
use crate::config::{help_text, load_config, Config};
use crate::dataset::{generate_dataset, load_dataset, DatasetSpec, DatasetSummary, TargetRecord};
use crate::error::{Error, Result};
use crate::experiment::{
    emit_report, hyperparameter_search, run_single, run_study, write_runs, write_trials, SearchBounds, Stage,
    StudyOptions, TrialSetup,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "qevo",
    version,
    about = "Evolve Clifford+T circuits that prepare target quantum states"
)]
#[command(after_help = "Run `qevo --help config` for the configuration file reference.")]
struct Cli {
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// More log output (-v info, -vv debug); RUST_LOG overrides
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or verify target datasets
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Evolve a circuit for every target of a dataset
    Run(RunArgs),
    /// Compare mutation strategy sets over a dataset
    Study(StudyArgs),
    /// Random hyperparameter search
    Tune(TuneArgs),
    /// Apply the rewrite optimizer to a circuit file
    Optimize {
        input: PathBuf,
        /// Write the optimized circuit here instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the statevector a circuit prepares
    Simulate { input: PathBuf },
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Write a JSON-lines dataset of optimized random targets
    Gen {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        depth_min: usize,
        #[arg(long, default_value_t = 15)]
        depth_max: usize,
    },
    /// Load a dataset and check every record
    Verify { file: PathBuf },
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target dataset (JSON lines)
    #[arg(long)]
    dataset: PathBuf,
    /// Overrides run.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Use only the first N targets
    #[arg(long)]
    targets: Option<usize>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Concurrent runs (0 = all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// `all` or a comma-separated list of sets such as `swap+add,change`
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Seeds run on every target
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    seeds: Vec<u64>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    common: Common,
    /// 1 (population and island keys) or 2 (mutation and selection keys)
    #[arg(long)]
    stage: String,
    /// Bounds file; built-in wide bounds for the stage when omitted
    #[arg(long)]
    bounds: Option<PathBuf>,
    /// Number of trials
    #[arg(long)]
    budget: usize,
    /// Seeds each trial is scored on
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args
        .windows(2)
        .any(|w| (w[0] == "--help" || w[0] == "help") && w[1] == "config")
    {
        print!("{}", help_text());
        return EXIT_OK;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.to_string() }));
            }
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Dataset(DatasetCommand::Gen {
            qubits,
            count,
            seed,
            out,
            depth_min,
            depth_max,
        }) => {
            let spec = DatasetSpec {
                n_qubits: *qubits,
                count: *count,
                depth_min: *depth_min,
                depth_max: *depth_max,
                seed: *seed,
            };
            let summary = generate_dataset(&spec, out)?;
            print_summary(cli.json, out, &summary, None);
            Ok(())
        }
        Command::Dataset(DatasetCommand::Verify { file }) => {
            let ds = load_dataset(file)?;
            print_summary(cli.json, file, &DatasetSummary::of(&ds.records), Some(&ds.content_hash));
            Ok(())
        }
        Command::Run(args) => cmd_run(cli.json, &args.common),
        Command::Study(args) => cmd_study(cli.json, args),
        Command::Tune(args) => cmd_tune(cli.json, args),
        Command::Optimize { input, out } => cmd_optimize(cli.json, input, out.as_deref()),
        Command::Simulate { input } => cmd_simulate(cli.json, input),
    }
}

fn print_summary(as_json: bool, path: &Path, summary: &DatasetSummary, hash: Option<&str>) {
    if as_json {
        let hist: serde_json::Map<String, serde_json::Value> = summary
            .depth_histogram
            .iter()
            .map(|(d, c)| (d.to_string(), json!(c)))
            .collect();
        println!(
            "{}",
            json!({ "path": path, "count": summary.count, "depth_histogram": hist, "sha256": hash })
        );
        return;
    }
    println!("{}: {} records", path.display(), summary.count);
    for (depth, count) in &summary.depth_histogram {
        println!("  depth {depth:>3}: {count}");
    }
    if let Some(h) = hash {
        println!("  sha256 {h}");
    }
}

/// Loads the config and dataset, applies `--seed` and writes the effective
/// configuration next to the outputs.
fn prepare(common: &Common) -> Result<(Config, Vec<TargetRecord>)> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = Some(seed);
        cfg.validate()?;
    }
    cfg.resolve_seed();
    let mut records = load_dataset(&common.dataset)?.records;
    if let Some(n) = common.targets {
        records.truncate(n);
    }
    if records.is_empty() {
        return Err(Error::InvalidInput("dataset has no targets".into()));
    }
    fs::create_dir_all(&common.out).map_err(|e| Error::io(&common.out, e))?;
    let path = common.out.join("effective_config.toml");
    fs::write(&path, cfg.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    Ok((cfg, records))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

fn cmd_run(as_json: bool, common: &Common) -> Result<()> {
    let (cfg, records) = prepare(common)?;
    let seed = cfg.run.seed.expect("resolved");
    let runs = pool(common.jobs)?.install(|| {
        records
            .par_iter()
            .map(|t| run_single(t, &cfg, seed))
            .collect::<Result<Vec<_>>>()
    })?;
    write_runs(&runs, &common.out)?;
    let (performance, _) = crate::experiment::performance_metric(&runs)?;
    let success = runs
        .iter()
        .filter(|r| r.final_best.fidelity >= cfg.fitness.success_fidelity)
        .count();
    if as_json {
        let rows: Vec<_> = runs
            .iter()
            .map(|r| {
                json!({
                    "target_id": r.target_id,
                    "fidelity": r.final_best.fidelity,
                    "composite": r.final_best.composite,
                    "depth": r.final_best.depth,
                    "t_count": r.final_best.t_count,
                    "generations": r.generations(),
                    "eval_mode": r.eval_mode.name(),
                    "circuit": CircuitJson::from(&r.best_candidate.circuit),
                })
            })
            .collect();
        println!(
            "{}",
            json!({ "seed": seed, "performance": performance, "successes": success, "runs": rows })
        );
    } else {
        for r in &runs {
            println!(
                "{}  fidelity {:.6}  composite {:.6}  depth {:>3}  T {:>2}  generations {:>3}",
                r.target_id,
                r.final_best.fidelity,
                r.final_best.composite,
                r.final_best.depth,
                r.final_best.t_count,
                r.generations()
            );
        }
        println!(
            "performance {performance:.6}; {success}/{} targets reached fidelity {}; seed {seed}",
            runs.len(),
            cfg.fitness.success_fidelity
        );
    }
    Ok(())
}

fn parse_sets(text: &str) -> Result<Vec<StrategySet>> {
    if text.trim() == "all" {
        return Ok(StrategySet::all().collect());
    }
    let mut sets: Vec<StrategySet> = text
        .split(',')
        .map(|s| {
            s.parse()
                .map_err(|e: qevo_core::EvolutionError| Error::InvalidInput(e.to_string()))
        })
        .collect::<Result<_>>()?;
    sets.sort();
    sets.dedup();
    Ok(sets)
}

fn cmd_study(as_json: bool, args: &StudyArgs) -> Result<()> {
    let sets = parse_sets(&args.strategies)?;
    let (cfg, records) = prepare(&args.common)?;
    let options = StudyOptions {
        jobs: args.common.jobs,
        deadline: None,
    };
    let studies = run_study(&records, &sets, &cfg, &args.seeds, options)?;
    emit_report(&studies, &args.common.out)?;
    if as_json {
        let rows: Vec<_> = studies
            .iter()
            .map(|s| {
                json!({
                    "strategies": s.label(),
                    "mean": s.performance,
                    "median": s.dispersion.median,
                    "p25": s.dispersion.p25,
                    "p75": s.dispersion.p75,
                    "stddev": s.dispersion.stddev,
                })
            })
            .collect();
        println!("{}", json!({ "studies": rows, "out": args.common.out }));
    } else {
        print!("{}", crate::experiment::ranking_txt(&studies));
        println!("reports written to {}", args.common.out.display());
    }
    Ok(())
}

fn cmd_tune(as_json: bool, args: &TuneArgs) -> Result<()> {
    let stage: Stage = args.stage.parse()?;
    let bounds = match &args.bounds {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            SearchBounds::parse(&text, stage).map_err(|e| match e {
                Error::Parse { line, message, .. } => Error::Parse {
                    path: path.clone(),
                    line,
                    message,
                },
                other => other,
            })?
        }
        None => SearchBounds::default_for(stage),
    };
    let (cfg, records) = prepare(&args.common)?;
    let root = cfg.run.seed.expect("resolved");
    let mut rng = stream(derive_seed(root, &[u64::from(stage == Stage::Two) + 1]));
    let setup = TrialSetup {
        dataset: &records,
        base: &cfg,
        seeds: &args.seeds,
        jobs: args.common.jobs,
    };
    let outcome = hyperparameter_search(stage, &bounds, args.budget, setup, &mut rng)?;
    write_trials(&outcome.trials, &args.common.out)?;
    let Some((id, best)) = &outcome.best else {
        return Err(Error::InvalidInput("every trial failed; see trials.csv".into()));
    };
    let path = args.common.out.join("best_config.toml");
    fs::write(&path, best.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    let score = outcome.trials[*id].score().expect("best trial is scored");
    if as_json {
        let params: serde_json::Map<String, serde_json::Value> = outcome.trials[*id]
            .params
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap_or_default()))
            .collect();
        println!(
            "{}",
            json!({ "best_trial": id, "score": score, "params": params, "config": path })
        );
    } else {
        println!("best trial {id}: score {score:.6}");
        for (k, v) in &outcome.trials[*id].params {
            println!("  {k} = {v}");
        }
        println!("configuration written to {}", path.display());
    }
    Ok(())
}

fn cmd_optimize(as_json: bool, input: &Path, out: Option<&Path>) -> Result<()> {
    let circuit = read_circuit(input)?;
    let reduced = optimize(&circuit);
    if let Some(path) = out {
        write_circuit(path, &reduced)?;
    }
    if as_json {
        println!(
            "{}",
            json!({
                "before": { "depth": circuit.depth(), "t_count": circuit.t_count() },
                "after": { "depth": reduced.depth(), "t_count": reduced.t_count() },
                "circuit": CircuitJson::from(&reduced),
            })
        );
    } else if out.is_some() {
        println!(
            "depth {} -> {}, T-count {} -> {}",
            circuit.depth(),
            reduced.depth(),
            circuit.t_count(),
            reduced.t_count()
        );
    } else {
        println!("{}", to_json(&reduced));
    }
    Ok(())
}

fn cmd_simulate(as_json: bool, input: &Path) -> Result<()> {
    let circuit = read_circuit(input)?;
    let state = simulate(&circuit)?;
    let zero = qevo_core::fidelity_pure(&state, &StateVector::zero(circuit.n_qubits()))?;
    if as_json {
        let amps: Vec<[f64; 2]> = state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
        println!(
            "{}",
            json!({ "n_qubits": circuit.n_qubits(), "statevector": amps, "fidelity_to_zero": zero })
        );
    } else {
        let n = circuit.n_qubits();
        for (i, a) in state.amplitudes().iter().enumerate() {
            println!("|{i:0n$b}>  {:+.12} {:+.12}i", a.re, a.im);
        }
        println!("fidelity to |{}>: {zero:.12}", "0".repeat(n));
    }
    Ok(())
}
