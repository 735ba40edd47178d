//! Core of the qevo engine: evolves Clifford+T circuits towards a target
//! quantum state with a genetic algorithm.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no I/O. It provides
//!
//! - [`gate`], [`circuit`], [`state`]: the gate set, list-based genomes and a
//!   dense statevector simulator;
//! - [`fidelity`]: pure and density-matrix fidelity and the composite score;
//! - [`rewrite`]: peephole cancellation and phase merging;
//! - [`evolution`]: initialization, selection, crossover, the four mutation
//!   strategies and the generational step;
//! - [`islands`]: the ring island model;
//! - [`eval`]: the evaluation contract shared with the std front end;
//! - [`rng`]: deterministic stream derivation.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod circuit;
pub mod eval;
pub mod evolution;
pub mod fidelity;
pub mod gate;
pub mod islands;
pub mod rewrite;
pub mod rng;
pub mod state;

pub use num_complex::Complex64;

pub use circuit::{depth, t_count, Circuit, CircuitError, Operation};
pub use eval::{EvalContext, EvalError, Evaluator, SerialEvaluator};
pub use evolution::{
    Candidate, DepthBounds, EvolutionConfig, EvolutionError, MutationConfig, Population, Strategy, StrategySet,
};
pub use fidelity::{fidelity_density, fidelity_pure, fitness, FitnessReport, FitnessWeights};
pub use gate::{gate_matrix, GateId};
pub use islands::{migrate, step_archipelago, Archipelago, IslandConfig, IslandError, MigrationOutcome};
pub use rewrite::{optimize, rewrite_pass, RewriteRule, DEFAULT_RULES};
pub use state::{simulate, to_density, DensityMatrix, StateError, StateVector, TargetState};
