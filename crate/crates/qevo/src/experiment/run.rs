use std::time::{Duration, Instant};

use qevo_core::rng::{derive_seed, stable_hash};
use qevo_core::{
    optimize, step_archipelago, Archipelago, Candidate, FitnessReport, Population, StrategySet, TargetState,
};

use crate::config::Config;
use crate::dataset::TargetRecord;
use crate::error::{Error, Result};
use crate::eval::{evaluate_population, resolve_workers, select_eval_mode, EvalEngine, EvalMode, ModeSetting};

/// Outcome of one GA run on one target.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub target_id: String,
    pub seed: u64,
    pub strategies: StrategySet,
    /// Best genome after the final rewrite pass, with its report.
    pub best_candidate: Candidate,
    /// Best composite score after each generation, generation 0 included.
    pub best_fitness_per_generation: Vec<f64>,
    pub final_best: FitnessReport,
    pub eval_mode: EvalMode,
    /// Auto-selection measurements; empty when the mode was fixed.
    pub eval_timings: Vec<(EvalMode, Duration)>,
    pub wall_time: Duration,
}

impl RunResult {
    /// Generations evolved before stopping.
    pub fn generations(&self) -> usize {
        self.best_fitness_per_generation.len() - 1
    }
}

/// Root seed of one run. Runs on different targets or strategy sets get
/// unrelated streams under the same user seed.
pub fn run_seed(seed: u64, target_id: &str, strategies: StrategySet) -> u64 {
    derive_seed(seed, &[stable_hash(target_id), u64::from(strategies.bits())])
}

pub fn run_single(target: &TargetRecord, cfg: &Config, seed: u64) -> Result<RunResult> {
    run_single_until(target, cfg, seed, None)
}

/// As [`run_single`], failing with [`Error::TrialTimeout`] once `deadline`
/// passes.
pub fn run_single_until(
    target: &TargetRecord,
    cfg: &Config,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<RunResult> {
    run_inner(target, cfg, seed, deadline).map_err(|e| Error::Run {
        target: target.id.clone(),
        seed,
        source: Box::new(e),
    })
}

fn run_inner(target: &TargetRecord, cfg: &Config, seed: u64, deadline: Option<Instant>) -> Result<RunResult> {
    let start = Instant::now();
    cfg.validate()?;
    let evo = cfg.evolution();
    let islands = cfg.islands();
    let island_evo = islands.island_config(&evo)?;
    let context = cfg.eval_context(TargetState::new(target.statevector.clone()));
    let strategies = cfg.evolutionary.strategies;
    let workers = resolve_workers(cfg.parallel.workers);

    let root = run_seed(seed, &target.id, strategies);
    let mut arch = Archipelago::init(&island_evo, target.n_qubits(), root, islands.effective_count())?;

    let (mode, eval_timings) = match cfg.parallel.mode {
        ModeSetting::Fixed(mode) => (mode, Vec::new()),
        ModeSetting::Auto => {
            let all = arch
                .islands()
                .iter()
                .flat_map(|p| p.candidates().iter().cloned())
                .collect();
            let selection = select_eval_mode(&Population::new(all), &context, workers)?;
            (selection.mode, selection.timings)
        }
    };
    let engine = EvalEngine::new(context, mode, workers);
    arch.evaluate(&engine)?;

    let mut series = Vec::with_capacity(evo.generations + 1);
    loop {
        let (i, j) = arch.best()?;
        series.push(arch.islands()[i].report(j)?.composite);
        let mut max_fidelity = 0.0f64;
        for island in arch.islands() {
            max_fidelity = max_fidelity.max(island.max_fidelity()?);
        }
        if max_fidelity >= evo.stop_fidelity || arch.generation() >= evo.generations {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Error::TrialTimeout {
                seconds: cfg.run.trial_timeout_secs,
            });
        }
        step_archipelago(&mut arch, &island_evo, &islands, &engine)?;
    }

    let (i, j) = arch.best()?;
    let reduced = optimize(&arch.islands()[i].candidates()[j].circuit);
    let mut last = Population::new(vec![Candidate::new(reduced)]);
    evaluate_population(&mut last, &engine.context, EvalMode::SerialSingle, 1)?;
    let best_candidate = last.into_candidates().remove(0);
    let final_best = best_candidate.report.expect("evaluated above");
    log::debug!(
        "{} seed {seed} [{strategies}]: fidelity {:.6}, composite {:.6} after {} generations",
        target.id,
        final_best.fidelity,
        final_best.composite,
        series.len() - 1
    );
    Ok(RunResult {
        target_id: target.id.clone(),
        seed,
        strategies,
        best_candidate,
        best_fitness_per_generation: series,
        final_best,
        eval_mode: mode,
        eval_timings,
        wall_time: start.elapsed(),
    })
}
