//! Independent dense-matrix oracle: every operation is embedded into the
//! full 2^n space with explicit Kronecker products and the circuit unitary
//! is their ordered product applied to |0...0>.
#![allow(dead_code)]

use qevo_core::{gate_matrix, Circuit, Complex64, GateId};

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|r| (0..dim).map(|col| c(if r == col { 1.0 } else { 0.0 })).collect())
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn two_by_two(gate: GateId) -> Matrix {
    let m = gate_matrix(gate);
    vec![vec![m[0], m[1]], vec![m[2], m[3]]]
}

/// Kronecker product over all wires, wire 0 leftmost.
fn tensor(factors: &[Matrix]) -> Matrix {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

/// The full-space unitary of one operation.
pub fn embed(gate: GateId, wires: &[usize], n: usize) -> Matrix {
    if gate == GateId::Cnot {
        let (control, target) = (wires[0], wires[1]);
        let p0 = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]];
        let p1 = vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(1.0)]];
        let x = two_by_two(GateId::X);
        let idle: Vec<Matrix> = (0..n)
            .map(|w| if w == control { p0.clone() } else { identity(2) })
            .collect();
        let flip: Vec<Matrix> = (0..n)
            .map(|w| {
                if w == control {
                    p1.clone()
                } else if w == target {
                    x.clone()
                } else {
                    identity(2)
                }
            })
            .collect();
        let (a, b) = (tensor(&idle), tensor(&flip));
        a.iter()
            .zip(&b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
            .collect()
    } else {
        let factors: Vec<Matrix> = (0..n)
            .map(|w| if w == wires[0] { two_by_two(gate) } else { identity(2) })
            .collect();
        tensor(&factors)
    }
}

pub fn circuit_unitary(circuit: &Circuit) -> Matrix {
    let n = circuit.n_qubits();
    circuit.ops().iter().fold(identity(1 << n), |acc, op| {
        matmul(&embed(op.gate(), op.wires(), n), &acc)
    })
}

pub fn oracle_state(circuit: &Circuit) -> Vec<Complex64> {
    circuit_unitary(circuit).iter().map(|row| row[0]).collect()
}

pub fn max_amp_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr().sqrt())
        .fold(0.0, f64::max)
}
