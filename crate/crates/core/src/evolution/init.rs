//! Random genome generation and the trivial-candidate filter.

use alloc::vec::Vec;

use rand::Rng;

use super::{Candidate, EvolutionConfig, EvolutionError, Population};
use crate::circuit::{Circuit, Operation};
use crate::gate::GateId;
use crate::state::{apply_ops, StateVector};

/// Draws a gate uniformly over the gates that fit on `n_qubits` wires, then
/// a uniformly random tuple of distinct wires for it.
pub fn random_operation<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Operation {
    let pool: &[GateId] = if n_qubits >= 2 {
        &GateId::ALL
    } else {
        &GateId::SINGLE_QUBIT
    };
    let gate = pool[rng.gen_range(0..pool.len())];
    random_wires_for(gate, n_qubits, rng)
}

pub(crate) fn random_wires_for<R: Rng + ?Sized>(gate: GateId, n_qubits: usize, rng: &mut R) -> Operation {
    match gate.arity() {
        1 => Operation::single(gate, rng.gen_range(0..n_qubits)),
        _ => {
            let control = rng.gen_range(0..n_qubits);
            let mut target = rng.gen_range(0..n_qubits - 1);
            if target >= control {
                target += 1;
            }
            Operation::cnot(control, target)
        }
    }
}

/// A genome whose length is uniform in `[min_depth, max_depth]`.
pub fn random_circuit<R: Rng + ?Sized>(n_qubits: usize, min_depth: usize, max_depth: usize, rng: &mut R) -> Circuit {
    let len = rng.gen_range(min_depth..=max_depth);
    let ops = (0..len).map(|_| random_operation(n_qubits, rng)).collect();
    Circuit::from_valid(n_qubits, ops)
}

/// True for genomes that cannot approach a generic target: those preparing
/// |0...0> up to global phase, and those without any CNOT on two or more
/// qubits.
pub fn is_trivial(circuit: &Circuit) -> bool {
    let n = circuit.n_qubits();
    if n >= 2 && circuit.cnot_count() == 0 {
        return true;
    }
    let mut amps = StateVector::zero(n).amplitudes().to_vec();
    apply_ops(&mut amps, n, circuit.ops());
    // Overlap with |0...0> is |amp_0|^2.
    amps[0].norm_sqr() > 1.0 - 1e-9
}

/// Draws nontrivial random genomes, giving up after `max_attempts` draws.
pub fn random_nontrivial<R: Rng + ?Sized>(
    n_qubits: usize,
    min_depth: usize,
    max_depth: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<Circuit, EvolutionError> {
    for _ in 0..max_attempts {
        let c = random_circuit(n_qubits, min_depth, max_depth, rng);
        if !is_trivial(&c) {
            return Ok(c);
        }
    }
    Err(EvolutionError::GenerationStalled { attempts: max_attempts })
}

/// Initial population of `cfg.population_size` nontrivial random genomes.
pub fn init_population<R: Rng + ?Sized>(
    cfg: &EvolutionConfig,
    n_qubits: usize,
    rng: &mut R,
) -> Result<Population, EvolutionError> {
    cfg.validate()?;
    let budget = 100 * cfg.population_size;
    let mut attempts = 0;
    let mut candidates = Vec::with_capacity(cfg.population_size);
    while candidates.len() < cfg.population_size {
        if attempts == budget {
            return Err(EvolutionError::GenerationStalled { attempts });
        }
        attempts += 1;
        let c = random_circuit(n_qubits, cfg.min_depth, cfg.max_depth, rng);
        if !is_trivial(&c) {
            candidates.push(Candidate::new(c));
        }
    }
    Ok(Population::new(candidates))
}
