//! State fidelity and the weighted composite fitness score.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::state::{DensityMatrix, StateError, StateVector};
use crate::Complex64;

/// Slack allowed outside [0, 1] before a fidelity is considered corrupt.
const RANGE_SLACK: f64 = 1e-9;

/// Eigenvalues below this are solver noise and treated as zero before
/// taking square roots; `sqrt(1e-16)` would otherwise inject ~1e-8 errors.
const EIGEN_FLOOR: f64 = 1e-12;

fn floored_sqrt(l: f64) -> f64 {
    if l < EIGEN_FLOOR {
        0.0
    } else {
        libm::sqrt(l)
    }
}

/// `|<psi|phi>|^2`, clamped to [0, 1].
pub fn fidelity_pure(psi: &StateVector, phi: &StateVector) -> Result<f64, StateError> {
    Ok(clamp_unit(psi.inner(phi)?.norm_sqr()))
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` for two density
/// matrices, via Hermitian eigendecompositions.
pub fn fidelity_density(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    if rho.dim() != sigma.dim() {
        return Err(StateError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    rho.validate()?;
    sigma.validate()?;

    let sqrt_rho = psd_sqrt(&to_matrix(rho));
    let inner = &sqrt_rho * to_matrix(sigma) * &sqrt_rho;
    // Symmetrize away rounding before the Hermitian solver sees it.
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let root_trace: f64 = inner.symmetric_eigenvalues().iter().map(|&l| floored_sqrt(l)).sum();
    Ok(clamp_unit(root_trace * root_trace))
}

pub(crate) fn hermitian_eigenvalues(m: &DensityMatrix) -> Vec<f64> {
    to_matrix(m).symmetric_eigenvalues().iter().copied().collect()
}

fn to_matrix(m: &DensityMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.entries())
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let vecs = &eig.eigenvectors;
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(floored_sqrt(l), 0.0)));
    vecs * roots * vecs.adjoint()
}

fn clamp_unit(f: f64) -> f64 {
    debug_assert!(
        (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&f),
        "fidelity {f} outside [0, 1]"
    );
    f.clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FitnessError {
    #[error("invalid fitness input: {0}")]
    InvalidInput(&'static str),
}

/// Weights of the composite score. Fidelity carries a strictly positive
/// weight; the depth and T-count penalties are non-negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitnessWeights {
    pub w_fidelity: f64,
    pub w_depth: f64,
    pub w_tops: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self {
            w_fidelity: 1.0,
            w_depth: 0.1,
            w_tops: 0.05,
        }
    }
}

impl FitnessWeights {
    pub fn new(w_fidelity: f64, w_depth: f64, w_tops: f64) -> Result<Self, FitnessError> {
        let w = Self {
            w_fidelity,
            w_depth,
            w_tops,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), FitnessError> {
        if !(self.w_fidelity > 0.0 && self.w_fidelity.is_finite()) {
            return Err(FitnessError::InvalidInput("w_fidelity must be positive"));
        }
        if !(self.w_depth >= 0.0 && self.w_depth.is_finite()) || !(self.w_tops >= 0.0 && self.w_tops.is_finite()) {
            return Err(FitnessError::InvalidInput("penalty weights must be non-negative"));
        }
        Ok(())
    }
}

/// Scores of one evaluated candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitnessReport {
    pub fidelity: f64,
    pub depth: usize,
    pub t_count: usize,
    /// `depth / d_max`.
    pub depth_score: f64,
    /// `t_count / d_max`.
    pub tops_score: f64,
    pub composite: f64,
}

/// Composite score `w_f·F − w_d·depth/d_max − w_t·t_ops/d_max`.
pub fn fitness(
    fidelity: f64,
    depth: usize,
    t_ops: usize,
    weights: &FitnessWeights,
    d_max: usize,
) -> Result<FitnessReport, FitnessError> {
    if d_max == 0 {
        return Err(FitnessError::InvalidInput("d_max must be positive"));
    }
    if t_ops > depth {
        return Err(FitnessError::InvalidInput("t_ops exceeds depth"));
    }
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&fidelity) {
        return Err(FitnessError::InvalidInput("fidelity outside [0, 1]"));
    }
    let fidelity = fidelity.clamp(0.0, 1.0);
    let depth_score = depth as f64 / d_max as f64;
    let tops_score = t_ops as f64 / d_max as f64;
    let composite = weights.w_fidelity * fidelity - weights.w_depth * depth_score - weights.w_tops * tops_score;
    Ok(FitnessReport {
        fidelity,
        depth,
        t_count: t_ops,
        depth_score,
        tops_score,
        composite,
    })
}
