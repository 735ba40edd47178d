//! Single-point crossover with depth clamping.

use alloc::vec::Vec;

use rand::Rng;

use super::init::random_operation;
use super::{DepthBounds, EvolutionError};
use crate::circuit::Circuit;

/// Cuts `a` at `i ∈ [1, len(a)−1]` and `b` at `j ∈ [1, len(b)−1]` and
/// exchanges the tails: `a[..i] ++ b[j..]` and `b[..j] ++ a[i..]`.
///
/// Children outside `bounds` are clamped by deleting uniformly random
/// operations or inserting random operations at uniform positions.
/// Crossing a genome with itself returns two copies of it.
pub fn single_point_crossover<R: Rng + ?Sized>(
    a: &Circuit,
    b: &Circuit,
    bounds: DepthBounds,
    rng: &mut R,
) -> Result<(Circuit, Circuit), EvolutionError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvolutionError::TooShort);
    }
    if a.n_qubits() != b.n_qubits() {
        return Err(EvolutionError::InvalidConfig("parents differ in qubit count".into()));
    }
    let i = rng.gen_range(1..a.len());
    let j = rng.gen_range(1..b.len());
    if a == b {
        return Ok((a.clone(), b.clone()));
    }
    let (ha, ta) = a.ops().split_at(i);
    let (hb, tb) = b.ops().split_at(j);
    let join = |head: &[_], tail: &[_]| -> Vec<_> { head.iter().chain(tail).copied().collect() };
    let mut first = Circuit::new(a.n_qubits(), join(ha, tb)).expect("parents are valid");
    let mut second = Circuit::new(a.n_qubits(), join(hb, ta)).expect("parents are valid");
    clamp_depth(&mut first, bounds, rng);
    clamp_depth(&mut second, bounds, rng);
    Ok((first, second))
}

/// Forces `circuit` into `bounds` by random deletion or insertion.
pub fn clamp_depth<R: Rng + ?Sized>(circuit: &mut Circuit, bounds: DepthBounds, rng: &mut R) {
    while circuit.len() > bounds.max {
        let index = rng.gen_range(0..circuit.len());
        circuit.remove(index);
    }
    while circuit.len() < bounds.min {
        let op = random_operation(circuit.n_qubits(), rng);
        let index = rng.gen_range(0..=circuit.len());
        circuit.insert(index, op).expect("random operations are valid");
    }
}
