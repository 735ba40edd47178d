//! Dense statevector simulation and density matrices.
//!
//! Basis index convention: wire 0 is the most significant bit, so the
//! basis state `|q0 q1 ... q(n-1)>` has index `q0·2^(n-1) + ... + q(n-1)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{Circuit, CircuitError, Operation};
use crate::gate::GateId;
use crate::Complex64;

/// Default qubit ceiling for simulation (4096 amplitudes).
pub const DEFAULT_QUBIT_LIMIT: usize = 12;

/// Tolerance accepted when wrapping externally supplied amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("{n_qubits} qubits exceeds the simulation limit of {limit}")]
    QubitLimitExceeded { n_qubits: usize, limit: usize },
    #[error(transparent)]
    InvalidWire(#[from] CircuitError),
    #[error("state norm deviates from 1 by {deviation:e}")]
    NotNormalized { deviation: f64 },
    #[error("amplitude count {0} is not a power of two")]
    BadLength(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(&'static str),
}

/// A normalized pure state on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// |0...0>.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amplitudes }
    }

    /// Wraps amplitudes whose norm is within [`NORM_TOLERANCE`] of one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let deviation = libm::fabs(libm::sqrt(norm_sqr(&amplitudes)) - 1.0);
        if !(deviation <= NORM_TOLERANCE) {
            return Err(StateError::NotNormalized { deviation });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(norm_sqr(&self.amplitudes))
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, StateError> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Applies `circuit`'s operations to this state.
    pub fn apply(&mut self, circuit: &Circuit) -> Result<(), StateError> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(StateError::DimensionMismatch {
                left: 1 << self.n_qubits,
                right: 1 << circuit.n_qubits(),
            });
        }
        apply_ops(&mut self.amplitudes, self.n_qubits, circuit.ops());
        Ok(())
    }
}

/// The desired output state of a synthesis run.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetState(StateVector);

impl TargetState {
    pub fn new(state: StateVector) -> Self {
        Self(state)
    }

    pub fn state(&self) -> &StateVector {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn density(&self) -> DensityMatrix {
        to_density(&self.0).expect("target states are normalized")
    }
}

/// A `dim x dim` density matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Accepts a row-major matrix satisfying the density-matrix invariants
    /// (Hermitian, unit trace, positive semidefinite, all within 1e-10).
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(StateError::NotDensityMatrix("shape"));
        }
        let m = Self { dim, entries };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn validate(&self) -> Result<(), StateError> {
        const TOL: f64 = 1e-10;
        for r in 0..self.dim {
            for c in r..self.dim {
                if (self.get(r, c) - self.get(c, r).conj()).norm_sqr() > TOL * TOL {
                    return Err(StateError::NotDensityMatrix("not Hermitian"));
                }
            }
        }
        let tr = self.trace();
        if libm::fabs(tr.re - 1.0) > TOL || libm::fabs(tr.im) > TOL {
            return Err(StateError::NotDensityMatrix("trace is not 1"));
        }
        let min_eig = crate::fidelity::hermitian_eigenvalues(self)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TOL {
            return Err(StateError::NotDensityMatrix("negative eigenvalue"));
        }
        Ok(())
    }

    pub(crate) fn from_raw(dim: usize, entries: Vec<Complex64>) -> Self {
        Self { dim, entries }
    }
}

/// `|psi><psi|`.
pub fn to_density(state: &StateVector) -> Result<DensityMatrix, StateError> {
    let deviation = libm::fabs(state.norm() - 1.0);
    if !(deviation <= NORM_TOLERANCE) {
        return Err(StateError::NotNormalized { deviation });
    }
    let amps = state.amplitudes();
    let dim = amps.len();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in amps {
        for b in amps {
            entries.push(a * b.conj());
        }
    }
    Ok(DensityMatrix::from_raw(dim, entries))
}

/// Simulates `circuit` on |0...0> with the default qubit limit.
pub fn simulate(circuit: &Circuit) -> Result<StateVector, StateError> {
    simulate_with_limit(circuit, DEFAULT_QUBIT_LIMIT)
}

pub fn simulate_with_limit(circuit: &Circuit, limit: usize) -> Result<StateVector, StateError> {
    let mut amplitudes = Vec::new();
    simulate_into(circuit, limit, &mut amplitudes)?;
    Ok(StateVector {
        n_qubits: circuit.n_qubits(),
        amplitudes,
    })
}

/// Simulates into a caller-owned buffer, which is resized and overwritten.
pub fn simulate_into(circuit: &Circuit, limit: usize, buffer: &mut Vec<Complex64>) -> Result<(), StateError> {
    let n = circuit.n_qubits();
    if n > limit {
        return Err(StateError::QubitLimitExceeded { n_qubits: n, limit });
    }
    for op in circuit.ops() {
        op.validate(n)?;
    }
    buffer.clear();
    buffer.resize(1 << n, Complex64::new(0.0, 0.0));
    buffer[0] = Complex64::new(1.0, 0.0);
    apply_ops(buffer, n, circuit.ops());
    Ok(())
}

pub(crate) fn apply_ops(amps: &mut [Complex64], n_qubits: usize, ops: &[Operation]) {
    for op in ops {
        apply_op(amps, n_qubits, op);
    }
}

fn apply_op(amps: &mut [Complex64], n_qubits: usize, op: &Operation) {
    let bit = |wire: usize| 1usize << (n_qubits - 1 - wire);
    match op.gate() {
        GateId::Cnot => {
            let (c, t) = (bit(op.wires()[0]), bit(op.wires()[1]));
            for i in 0..amps.len() {
                if i & c != 0 && i & t == 0 {
                    amps.swap(i, i | t);
                }
            }
        }
        gate => {
            let b = bit(op.wires()[0]);
            let m = gate.single_qubit_matrix().expect("single-qubit gate");
            match gate {
                GateId::X => for_pairs(amps, b, core::mem::swap),
                // Diagonal gates only touch the |1> component.
                GateId::Z | GateId::S | GateId::Sdg | GateId::T | GateId::Tdg => {
                    let phase = m[1][1];
                    for_pairs(amps, b, |_, a1| *a1 *= phase)
                }
                _ => for_pairs(amps, b, |a0, a1| {
                    let (x, y) = (*a0, *a1);
                    *a0 = m[0][0] * x + m[0][1] * y;
                    *a1 = m[1][0] * x + m[1][1] * y;
                }),
            }
        }
    }
}

#[inline]
fn for_pairs(amps: &mut [Complex64], bit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    // Blocks of 2·bit amplitudes: the low half has the bit clear, the high half set.
    for block in amps.chunks_exact_mut(bit << 1) {
        let (lo, hi) = block.split_at_mut(bit);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

pub(crate) fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn inner(left: &[Complex64], right: &[Complex64]) -> Result<Complex64, StateError> {
    if left.len() != right.len() {
        return Err(StateError::DimensionMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    Ok(left.iter().zip(right).map(|(a, b)| a.conj() * b).sum())
}
