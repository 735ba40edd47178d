//! Peephole simplification of Clifford+T genomes.
//!
//! Every rule rewrites a pair of operations on the *same* ordered wire list
//! into zero or one operation on those wires. Two operations are considered
//! adjacent when everything between them acts on wires disjoint from theirs,
//! since such operations commute with both.

use alloc::vec::Vec;

use crate::circuit::{Circuit, Operation};
use crate::gate::{gate_matrix, GateId};
use crate::Complex64;

/// Default number of sweeps [`optimize`] performs before giving up.
pub const DEFAULT_PASS_LIMIT: usize = 50;

/// `first` then `second` on identical wires equals `replacement` (or the
/// identity when `replacement` is `None`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub name: &'static str,
    pub first: GateId,
    pub second: GateId,
    pub replacement: Option<GateId>,
}

const fn cancel(name: &'static str, first: GateId, second: GateId) -> RewriteRule {
    RewriteRule {
        name,
        first,
        second,
        replacement: None,
    }
}

const fn merge(name: &'static str, first: GateId, second: GateId, into: GateId) -> RewriteRule {
    RewriteRule {
        name,
        first,
        second,
        replacement: Some(into),
    }
}

/// Inverse-pair cancellations and phase merges.
pub const DEFAULT_RULES: [RewriteRule; 13] = [
    cancel("x-x", GateId::X, GateId::X),
    cancel("y-y", GateId::Y, GateId::Y),
    cancel("z-z", GateId::Z, GateId::Z),
    cancel("h-h", GateId::H, GateId::H),
    cancel("cnot-cnot", GateId::Cnot, GateId::Cnot),
    cancel("s-sdg", GateId::S, GateId::Sdg),
    cancel("sdg-s", GateId::Sdg, GateId::S),
    cancel("t-tdg", GateId::T, GateId::Tdg),
    cancel("tdg-t", GateId::Tdg, GateId::T),
    merge("t-t", GateId::T, GateId::T, GateId::S),
    merge("tdg-tdg", GateId::Tdg, GateId::Tdg, GateId::Sdg),
    merge("s-s", GateId::S, GateId::S, GateId::Z),
    merge("sdg-sdg", GateId::Sdg, GateId::Sdg, GateId::Z),
];

impl RewriteRule {
    /// Checks that pattern and replacement are the same unitary (exactly,
    /// not up to global phase) within `tol` per entry.
    pub fn verify(&self, tol: f64) -> bool {
        if self.first.arity() != self.second.arity()
            || self.replacement.is_some_and(|r| r.arity() != self.first.arity())
        {
            return false;
        }
        let dim = 1 << self.first.arity();
        let (a, b) = (gate_matrix(self.first), gate_matrix(self.second));
        // Applying `first` then `second` is the product second·first.
        let mut product = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                product[r * dim + c] = (0..dim).map(|k| b[r * dim + k] * a[k * dim + c]).sum();
            }
        }
        let expected: Vec<Complex64> = match self.replacement {
            Some(g) => gate_matrix(g),
            None => (0..dim * dim)
                .map(|i| Complex64::new(if i % (dim + 1) == 0 { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        };
        product
            .iter()
            .zip(&expected)
            .all(|(p, e)| (p - e).norm_sqr() <= tol * tol)
    }

    fn matches(&self, first: &Operation, second: &Operation) -> bool {
        first.gate() == self.first && second.gate() == self.second && first.wires() == second.wires()
    }
}

/// One left-to-right sweep. Returns the rewritten circuit and the number of
/// rule applications.
///
/// Each surviving operation is paired with the next operation that shares a
/// wire with it; if that operation acts on exactly the same wires and some
/// rule matches, the pair is replaced in place. Operations produced by a
/// rewrite are not revisited within the same sweep.
pub fn rewrite_pass(circuit: &Circuit, rules: &[RewriteRule]) -> (Circuit, usize) {
    let mut slots: Vec<Option<Operation>> = circuit.ops().iter().copied().map(Some).collect();
    let mut applied = 0;
    let mut i = 0;
    while i < slots.len() {
        let Some(op) = slots[i] else {
            i += 1;
            continue;
        };
        let partner = (i + 1..slots.len()).find(|&j| slots[j].is_some_and(|other| other.overlaps(&op)));
        if let Some(j) = partner {
            let other = slots[j].expect("partner is live");
            if let Some(rule) = rules.iter().find(|r| r.matches(&op, &other)) {
                slots[i] = rule.replacement.map(|g| op.with_gate(g));
                slots[j] = None;
                applied += 1;
            }
        }
        i += 1;
    }
    let ops = slots.into_iter().flatten().collect();
    (Circuit::from_valid(circuit.n_qubits(), ops), applied)
}

/// Result of [`optimize_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimized {
    pub circuit: Circuit,
    pub passes: usize,
    pub rewrites: usize,
    /// The pass limit stopped optimization before a fixpoint was reached.
    pub limit_hit: bool,
}

/// Sweeps with [`DEFAULT_RULES`] until nothing applies.
pub fn optimize(circuit: &Circuit) -> Circuit {
    optimize_with(circuit, &DEFAULT_RULES, DEFAULT_PASS_LIMIT).circuit
}

pub fn optimize_with(circuit: &Circuit, rules: &[RewriteRule], pass_limit: usize) -> Optimized {
    let mut current = circuit.clone();
    let mut rewrites = 0;
    for pass in 1..=pass_limit {
        let (next, applied) = rewrite_pass(&current, rules);
        current = next;
        rewrites += applied;
        if applied == 0 {
            return Optimized {
                circuit: current,
                passes: pass,
                rewrites,
                limit_hit: false,
            };
        }
    }
    log::warn!("rewrite pass limit {pass_limit} reached; returning last circuit");
    Optimized {
        circuit: current,
        passes: pass_limit,
        rewrites,
        limit_hit: true,
    }
}
