//! List-based circuit genomes.

use alloc::vec::Vec;
use core::fmt;

use crate::gate::GateId;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("{gate} takes {expected} wire(s), got {got}")]
    WrongArity { gate: GateId, expected: usize, got: usize },
    #[error("wire {wire} out of range for a {n_qubits}-qubit circuit")]
    InvalidWire { wire: usize, n_qubits: usize },
    #[error("{gate} repeats wire {wire}")]
    RepeatedWire { gate: GateId, wire: usize },
}

/// One gate application. For CNOT the wires are `(control, target)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    gate: GateId,
    // The second slot is zero for single-qubit gates so that derived
    // equality compares only meaningful wires.
    wires: [usize; 2],
}

impl Operation {
    pub fn new(gate: GateId, wires: &[usize]) -> Result<Self, CircuitError> {
        if wires.len() != gate.arity() {
            return Err(CircuitError::WrongArity {
                gate,
                expected: gate.arity(),
                got: wires.len(),
            });
        }
        if gate.arity() == 2 && wires[0] == wires[1] {
            return Err(CircuitError::RepeatedWire { gate, wire: wires[0] });
        }
        let mut slots = [0; 2];
        slots[..wires.len()].copy_from_slice(wires);
        Ok(Self { gate, wires: slots })
    }

    /// A single-qubit gate on `wire`.
    ///
    /// # Panics
    /// If `gate` is CNOT.
    pub fn single(gate: GateId, wire: usize) -> Self {
        assert_eq!(gate.arity(), 1, "{gate} is not a single-qubit gate");
        Self { gate, wires: [wire, 0] }
    }

    /// # Panics
    /// If `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CNOT needs two distinct wires");
        Self {
            gate: GateId::Cnot,
            wires: [control, target],
        }
    }

    pub fn gate(&self) -> GateId {
        self.gate
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires[..self.gate.arity()]
    }

    /// Same gate with its wire list reversed (a no-op for single-qubit gates).
    pub fn flipped(&self) -> Self {
        match self.gate.arity() {
            2 => Self {
                gate: self.gate,
                wires: [self.wires[1], self.wires[0]],
            },
            _ => *self,
        }
    }

    pub(crate) fn with_gate(&self, gate: GateId) -> Self {
        debug_assert_eq!(gate.arity(), self.gate.arity());
        Self {
            gate,
            wires: self.wires,
        }
    }

    /// True when the two operations touch at least one common wire.
    pub fn overlaps(&self, other: &Operation) -> bool {
        self.wires().iter().any(|w| other.wires().contains(w))
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), CircuitError> {
        match self.wires().iter().find(|&&w| w >= n_qubits) {
            Some(&wire) => Err(CircuitError::InvalidWire { wire, n_qubits }),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.wires() {
            [w] => write!(f, "{}@{}", self.gate, w),
            [c, t] => write!(f, "{}@({},{})", self.gate, c, t),
            _ => unreachable!(),
        }
    }
}

/// A candidate genome: an ordered operation list on a fixed qubit count.
///
/// Every operation is valid for `n_qubits`; constructors and mutators keep
/// that invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(n_qubits: usize, ops: Vec<Operation>) -> Result<Self, CircuitError> {
        if n_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for op in &ops {
            op.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, ops })
    }

    pub fn empty(n_qubits: usize) -> Result<Self, CircuitError> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<Operation> {
        self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Genome length. Depth here is the operation count, not the number of
    /// parallel layers.
    pub fn depth(&self) -> usize {
        self.ops.len()
    }

    /// Number of `T` and `Tdg` operations.
    pub fn t_count(&self) -> usize {
        self.ops.iter().filter(|op| op.gate().is_t()).count()
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| op.gate() == GateId::Cnot).count()
    }

    pub fn push(&mut self, op: Operation) -> Result<(), CircuitError> {
        op.validate(self.n_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn insert(&mut self, index: usize, op: Operation) -> Result<(), CircuitError> {
        op.validate(self.n_qubits)?;
        self.ops.insert(index, op);
        Ok(())
    }

    pub fn remove(&mut self, index: usize) -> Operation {
        self.ops.remove(index)
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.ops.swap(a, b);
    }

    /// Replace the operation at `index`; the replacement must be valid.
    pub fn replace(&mut self, index: usize, op: Operation) -> Result<Operation, CircuitError> {
        op.validate(self.n_qubits)?;
        Ok(core::mem::replace(&mut self.ops[index], op))
    }

    /// `self ++ other`.
    ///
    /// # Panics
    /// If the qubit counts differ.
    pub fn concat(&self, other: &Circuit) -> Circuit {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&other.ops);
        Circuit {
            n_qubits: self.n_qubits,
            ops,
        }
    }

    /// Builds a circuit from operations already known to be valid.
    pub(crate) fn from_valid(n_qubits: usize, ops: Vec<Operation>) -> Self {
        debug_assert!(ops.iter().all(|op| op.validate(n_qubits).is_ok()));
        Self { n_qubits, ops }
    }
}

/// Operation count of `circuit`.
pub fn depth(circuit: &Circuit) -> usize {
    circuit.depth()
}

/// Number of T-type operations in `circuit`.
pub fn t_count(circuit: &Circuit) -> usize {
    circuit.t_count()
}
