//! The fixed Clifford+T gate set.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;
use core::str::FromStr;

use crate::Complex64;

/// A gate identifier from the Clifford+T set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateId {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    /// Controlled-NOT; wire 0 is the control, wire 1 the target.
    Cnot,
}

impl GateId {
    /// Every gate, in canonical order.
    pub const ALL: [GateId; 9] = [
        GateId::H,
        GateId::X,
        GateId::Y,
        GateId::Z,
        GateId::S,
        GateId::Sdg,
        GateId::T,
        GateId::Tdg,
        GateId::Cnot,
    ];

    /// The single-qubit members of the set.
    pub const SINGLE_QUBIT: [GateId; 8] = [
        GateId::H,
        GateId::X,
        GateId::Y,
        GateId::Z,
        GateId::S,
        GateId::Sdg,
        GateId::T,
        GateId::Tdg,
    ];

    pub const fn arity(self) -> usize {
        match self {
            GateId::Cnot => 2,
            _ => 1,
        }
    }

    /// True exactly for `T` and `Tdg`.
    pub const fn is_t(self) -> bool {
        matches!(self, GateId::T | GateId::Tdg)
    }

    /// Canonical name used in the circuit JSON format.
    pub const fn name(self) -> &'static str {
        match self {
            GateId::H => "H",
            GateId::X => "X",
            GateId::Y => "Y",
            GateId::Z => "Z",
            GateId::S => "S",
            GateId::Sdg => "Sdg",
            GateId::T => "T",
            GateId::Tdg => "Tdg",
            GateId::Cnot => "CNOT",
        }
    }

    /// The 2x2 unitary of a single-qubit gate, `None` for CNOT.
    pub fn single_qubit_matrix(self) -> Option<[[Complex64; 2]; 2]> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let t = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let m = match self {
            GateId::H => [[h, h], [h, -h]],
            GateId::X => [[zero, one], [one, zero]],
            GateId::Y => [[zero, -i], [i, zero]],
            GateId::Z => [[one, zero], [zero, -one]],
            GateId::S => [[one, zero], [zero, i]],
            GateId::Sdg => [[one, zero], [zero, -i]],
            GateId::T => [[one, zero], [zero, t]],
            GateId::Tdg => [[one, zero], [zero, t.conj()]],
            GateId::Cnot => return None,
        };
        Some(m)
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown gate name `{0}`")]
pub struct UnknownGate(pub alloc::string::String);

impl FromStr for GateId {
    type Err = UnknownGate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateId::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| UnknownGate(s.into()))
    }
}

/// Row-major unitary of `gate`, of dimension `2^arity`.
///
/// CNOT uses the basis order |control target>, so it swaps |10> and |11>.
pub fn gate_matrix(gate: GateId) -> Vec<Complex64> {
    match gate.single_qubit_matrix() {
        Some(m) => vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        None => {
            let mut u = vec![Complex64::new(0.0, 0.0); 16];
            for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                u[row * 4 + col] = Complex64::new(1.0, 0.0);
            }
            u
        }
    }
}
