use std::time::Instant;

use qevo_core::StrategySet;
use rayon::prelude::*;

use super::run::{run_single_until, RunResult};
use crate::config::Config;
use crate::dataset::TargetRecord;
use crate::error::{Error, Result};

/// Spread of the per-run final composite scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dispersion {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub strategies: StrategySet,
    pub config: Config,
    pub runs: Vec<RunResult>,
    pub performance: f64,
    pub dispersion: Dispersion,
}

impl StudyResult {
    pub fn from_runs(strategies: StrategySet, config: Config, runs: Vec<RunResult>) -> Result<Self> {
        let (performance, dispersion) = performance_metric(&runs)?;
        Ok(Self {
            strategies,
            config,
            runs,
            performance,
            dispersion,
        })
    }

    pub fn label(&self) -> String {
        self.strategies.label()
    }
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn dispersion(values: &[f64]) -> Dispersion {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    Dispersion {
        median: percentile(&sorted, 0.5),
        p25: percentile(&sorted, 0.25),
        p75: percentile(&sorted, 0.75),
        stddev: var.sqrt(),
    }
}

/// Mean over targets of the seed-averaged final composite scores, with the
/// dispersion of the individual run finals. Targets are taken in order of
/// first appearance.
pub fn performance_metric(runs: &[RunResult]) -> Result<(f64, Dispersion)> {
    if runs.is_empty() {
        return Err(Error::EmptyStudy);
    }
    let mut targets: Vec<(&str, Vec<f64>)> = Vec::new();
    for r in runs {
        match targets.iter_mut().find(|(id, _)| *id == r.target_id) {
            Some((_, finals)) => finals.push(r.final_best.composite),
            None => targets.push((&r.target_id, vec![r.final_best.composite])),
        }
    }
    let per_target: Vec<f64> = targets.iter().map(|(_, finals)| mean(finals)).collect();
    let finals: Vec<f64> = runs.iter().map(|r| r.final_best.composite).collect();
    Ok((mean(&per_target), dispersion(&finals)))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StudyOptions {
    /// Concurrent runs; 0 means the rayon default.
    pub jobs: usize,
    pub deadline: Option<Instant>,
}

/// Runs every (strategy set, target, seed) combination. All sets share the
/// dataset, seeds and every non-mutation setting of `cfg`. Results are
/// sorted by performance, best first, ties by set bitmask.
pub fn run_study(
    dataset: &[TargetRecord],
    sets: &[StrategySet],
    cfg: &Config,
    seeds: &[u64],
    options: StudyOptions,
) -> Result<Vec<StudyResult>> {
    if sets.is_empty() || dataset.is_empty() || seeds.is_empty() {
        return Err(Error::EmptyStudy);
    }
    let configs: Vec<Config> = sets
        .iter()
        .map(|&s| {
            let mut c = cfg.clone();
            c.evolutionary.strategies = s;
            c
        })
        .collect();
    let jobs: Vec<(usize, usize, u64)> = (0..sets.len())
        .flat_map(|s| (0..dataset.len()).flat_map(move |t| seeds.iter().map(move |&seed| (s, t, seed))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let mut runs: Vec<RunResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, t, seed)| run_single_until(&dataset[t], &configs[s], seed, options.deadline))
            .collect::<Result<_>>()
    })?;

    let per_set = dataset.len() * seeds.len();
    let mut studies = Vec::with_capacity(sets.len());
    for (s, set) in sets.iter().enumerate().rev() {
        let set_runs = runs.split_off(s * per_set);
        studies.push(StudyResult::from_runs(*set, configs[s].clone(), set_runs)?);
    }
    studies.sort_by(|a, b| {
        b.performance
            .total_cmp(&a.performance)
            .then(a.strategies.bits().cmp(&b.strategies.bits()))
    });
    Ok(studies)
}
