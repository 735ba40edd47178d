//! Candidate evaluation: simulate, compare with the target, score.

use alloc::vec::Vec;

use crate::circuit::Circuit;
use crate::evolution::Population;
use crate::fidelity::{fitness, FitnessError, FitnessReport, FitnessWeights};
use crate::state::{inner, simulate_into, StateError, TargetState, DEFAULT_QUBIT_LIMIT};
use crate::Complex64;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("circuit has {circuit} qubits but the target has {target}")]
    DimensionMismatch { circuit: usize, target: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error("evaluation of candidate {index} failed twice")]
    EvalFailed { index: usize },
}

/// Everything needed to score a genome.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalContext {
    pub target: TargetState,
    pub weights: FitnessWeights,
    /// Normalizer of the depth and T-count penalties.
    pub d_max: usize,
    pub qubit_limit: usize,
}

impl EvalContext {
    pub fn new(target: TargetState, weights: FitnessWeights, d_max: usize) -> Self {
        Self {
            target,
            weights,
            d_max,
            qubit_limit: DEFAULT_QUBIT_LIMIT,
        }
    }

    /// Scores `circuit`, reusing `buffer` for the simulated amplitudes.
    pub fn evaluate_with_buffer(
        &self,
        circuit: &Circuit,
        buffer: &mut Vec<Complex64>,
    ) -> Result<FitnessReport, EvalError> {
        if circuit.n_qubits() != self.target.n_qubits() {
            return Err(EvalError::DimensionMismatch {
                circuit: circuit.n_qubits(),
                target: self.target.n_qubits(),
            });
        }
        simulate_into(circuit, self.qubit_limit, buffer)?;
        let overlap = inner(buffer, self.target.state().amplitudes())?;
        let fidelity = overlap.norm_sqr().clamp(0.0, 1.0);
        Ok(fitness(
            fidelity,
            circuit.depth(),
            circuit.t_count(),
            &self.weights,
            self.d_max,
        )?)
    }

    pub fn evaluate(&self, circuit: &Circuit) -> Result<FitnessReport, EvalError> {
        self.evaluate_with_buffer(circuit, &mut Vec::new())
    }
}

/// Attaches fitness reports to every unevaluated candidate of a population.
///
/// Implementations may schedule work however they like but must produce the
/// same reports as [`EvalContext::evaluate`] and must not alter genomes.
pub trait Evaluator {
    fn evaluate_population(&self, pop: &mut Population) -> Result<(), EvalError>;
}

/// Single-threaded evaluator sharing one amplitude buffer.
#[derive(Clone, Debug)]
pub struct SerialEvaluator<'a> {
    pub context: &'a EvalContext,
}

impl Evaluator for SerialEvaluator<'_> {
    fn evaluate_population(&self, pop: &mut Population) -> Result<(), EvalError> {
        let mut buffer = Vec::new();
        for candidate in pop.candidates_mut() {
            if candidate.report.is_none() {
                candidate.report = Some(self.context.evaluate_with_buffer(&candidate.circuit, &mut buffer)?);
            }
        }
        Ok(())
    }
}
