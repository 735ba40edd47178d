//! Population evaluation under three scheduling modes, plus timing-based
//! automatic selection among them.

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use qevo_core::{Candidate, Circuit, Complex64, EvalContext, EvalError, Evaluator, FitnessReport, Population};

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "QEVO_WORKERS";

/// A concrete evaluation schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalMode {
    /// Contiguous chunks evaluated on scoped worker threads.
    ParallelBatch,
    /// One candidate at a time, each with a fresh state buffer.
    SerialSingle,
    /// One pass grouped by qubit count, reusing one buffer per group.
    SerialBatch,
}

impl EvalMode {
    /// Tie-break order of automatic selection, simplest first.
    pub const PREFERENCE: [EvalMode; 3] = [EvalMode::SerialBatch, EvalMode::SerialSingle, EvalMode::ParallelBatch];

    pub fn name(self) -> &'static str {
        match self {
            EvalMode::ParallelBatch => "parallel",
            EvalMode::SerialSingle => "serial_single",
            EvalMode::SerialBatch => "serial_batch",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The configured mode: fixed, or chosen by timing generation 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeSetting {
    #[default]
    Auto,
    Fixed(EvalMode),
}

impl ModeSetting {
    pub fn name(self) -> &'static str {
        match self {
            ModeSetting::Auto => "auto",
            ModeSetting::Fixed(m) => m.name(),
        }
    }
}

impl fmt::Display for ModeSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown evaluation mode `{0}` (expected auto, parallel, serial_single or serial_batch)")]
pub struct UnknownMode(pub String);

impl FromStr for ModeSetting {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => ModeSetting::Auto,
            "parallel" => ModeSetting::Fixed(EvalMode::ParallelBatch),
            "serial_single" => ModeSetting::Fixed(EvalMode::SerialSingle),
            "serial_batch" => ModeSetting::Fixed(EvalMode::SerialBatch),
            other => return Err(UnknownMode(other.to_owned())),
        })
    }
}

/// Available hardware parallelism, at least one.
pub fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}

/// `configured` (0 meaning hardware parallelism), overridden by
/// `QEVO_WORKERS` when that is set to a positive integer.
pub fn resolve_workers(configured: usize) -> usize {
    if let Some(n) = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            return n;
        }
    }
    if configured == 0 {
        default_workers()
    } else {
        configured
    }
}

/// Scores every unevaluated candidate of `pop` under `mode`.
pub fn evaluate_population(
    pop: &mut Population,
    context: &EvalContext,
    mode: EvalMode,
    workers: usize,
) -> Result<(), EvalError> {
    evaluate_with(pop, mode, workers, &|c: &Circuit, buf: &mut Vec<Complex64>| {
        context.evaluate_with_buffer(c, buf)
    })
}

fn pending(pop: &Population) -> Vec<usize> {
    pop.candidates()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.report.is_none())
        .map(|(i, _)| i)
        .collect()
}

/// Evaluation with an injectable scoring function.
pub(crate) fn evaluate_with<F>(pop: &mut Population, mode: EvalMode, workers: usize, score: &F) -> Result<(), EvalError>
where
    F: Fn(&Circuit, &mut Vec<Complex64>) -> Result<FitnessReport, EvalError> + Sync,
{
    let todo = pending(pop);
    match mode {
        EvalMode::SerialSingle => {
            for i in todo {
                let report = score(&pop.candidates()[i].circuit, &mut Vec::new())?;
                pop.candidates_mut()[i].report = Some(report);
            }
        }
        EvalMode::SerialBatch => {
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for i in todo {
                groups
                    .entry(pop.candidates()[i].circuit.n_qubits())
                    .or_default()
                    .push(i);
            }
            for indices in groups.values() {
                let n = pop.candidates()[indices[0]].circuit.n_qubits();
                let mut buffer = Vec::with_capacity(1usize << n.min(30));
                for &i in indices {
                    let report = score(&pop.candidates()[i].circuit, &mut buffer)?;
                    pop.candidates_mut()[i].report = Some(report);
                }
            }
        }
        EvalMode::ParallelBatch => {
            let reports = parallel_reports(pop.candidates(), &todo, workers.max(1), score)?;
            for (i, report) in todo.into_iter().zip(reports) {
                pop.candidates_mut()[i].report = Some(report);
            }
        }
    }
    Ok(())
}

type ChunkResult = Result<Vec<FitnessReport>, EvalError>;

fn run_chunk<F>(candidates: &[Candidate], chunk: &[usize], score: &F) -> ChunkResult
where
    F: Fn(&Circuit, &mut Vec<Complex64>) -> Result<FitnessReport, EvalError> + Sync,
{
    let mut buffer = Vec::new();
    chunk
        .iter()
        .map(|&i| score(&candidates[i].circuit, &mut buffer))
        .collect()
}

/// Reports for `todo` in index order. A chunk whose worker panics is
/// retried once on the calling thread; a second panic yields `EvalFailed`
/// naming the first candidate of the chunk.
fn parallel_reports<F>(
    candidates: &[Candidate],
    todo: &[usize],
    workers: usize,
    score: &F,
) -> Result<Vec<FitnessReport>, EvalError>
where
    F: Fn(&Circuit, &mut Vec<Complex64>) -> Result<FitnessReport, EvalError> + Sync,
{
    if todo.is_empty() {
        return Ok(Vec::new());
    }
    let chunk_size = todo.len().div_ceil(workers);
    let outcomes: Vec<thread::Result<ChunkResult>> = thread::scope(|s| {
        let handles: Vec<_> = todo
            .chunks(chunk_size)
            .map(|chunk| s.spawn(move || run_chunk(candidates, chunk, score)))
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut reports = Vec::with_capacity(todo.len());
    for (chunk, outcome) in todo.chunks(chunk_size).zip(outcomes) {
        let result = match outcome {
            Ok(result) => result,
            Err(_) => {
                log::warn!(
                    "evaluation worker for candidates starting at {} panicked; retrying",
                    chunk[0]
                );
                catch_unwind(AssertUnwindSafe(|| run_chunk(candidates, chunk, score)))
                    .map_err(|_| EvalError::EvalFailed { index: chunk[0] })?
            }
        };
        reports.extend(result?);
    }
    Ok(reports)
}

/// An [`Evaluator`] bound to a resolved mode.
#[derive(Clone, Debug)]
pub struct EvalEngine {
    pub context: EvalContext,
    pub mode: EvalMode,
    pub workers: usize,
}

impl EvalEngine {
    pub fn new(context: EvalContext, mode: EvalMode, workers: usize) -> Self {
        Self {
            context,
            mode,
            workers: workers.max(1),
        }
    }
}

impl Evaluator for EvalEngine {
    fn evaluate_population(&self, pop: &mut Population) -> Result<(), EvalError> {
        evaluate_population(pop, &self.context, self.mode, self.workers)
    }
}

/// Outcome of automatic mode selection.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSelection {
    pub mode: EvalMode,
    /// Measured wall time per mode, in [`EvalMode::PREFERENCE`] order.
    pub timings: Vec<(EvalMode, Duration)>,
}

/// Times one full evaluation of `pop` (reports cleared) under each mode and
/// returns the fastest. `pop` itself is left untouched.
pub fn select_eval_mode(pop: &Population, context: &EvalContext, workers: usize) -> Result<ModeSelection, EvalError> {
    select_eval_mode_repeated(pop, context, workers, 1)
}

/// As [`select_eval_mode`], keeping the minimum over `repeats` timings.
pub fn select_eval_mode_repeated(
    pop: &Population,
    context: &EvalContext,
    workers: usize,
    repeats: usize,
) -> Result<ModeSelection, EvalError> {
    let fresh: Vec<Candidate> = pop
        .candidates()
        .iter()
        .map(|c| Candidate::new(c.circuit.clone()))
        .collect();
    let mut timings = Vec::with_capacity(3);
    for mode in EvalMode::PREFERENCE {
        let mut best = Duration::MAX;
        for _ in 0..repeats.max(1) {
            let mut probe = Population::with_generation(fresh.clone(), pop.generation());
            let start = Instant::now();
            evaluate_population(&mut probe, context, mode, workers)?;
            best = best.min(start.elapsed());
        }
        timings.push((mode, best));
    }
    let mode = fastest(&timings);
    log::info!(
        "evaluation mode {mode} selected ({})",
        timings
            .iter()
            .map(|(m, d)| format!("{m} {} us", d.as_micros()))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(ModeSelection { mode, timings })
}

/// Argmin over the timings; earlier entries win ties.
pub fn fastest(timings: &[(EvalMode, Duration)]) -> EvalMode {
    let mut best = timings[0];
    for &t in &timings[1..] {
        if t.1 < best.1 {
            best = t;
        }
    }
    best.0
}
