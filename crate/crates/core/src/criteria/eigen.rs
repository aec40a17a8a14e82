//! Eigen-systems of truncated covariances.

use serde::{Deserialize, Serialize};

use crate::criteria::normalizer::NormalizerSeq;
use crate::error::Result;
use crate::linalg::{symmetric_eigen, Mat};
use crate::models::MomentModel;

/// `Γ² = Σ λ_i² u_i u_iᵀ` with `λ_1 ≥ … ≥ λ_rank > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    /// Eigenvalues `λ_i²` of `Γ²`, descending, clamped to 0 below
    /// `1e-12·trace`.
    pub eigenvalues: Vec<f64>,
    /// `λ_i = √eigenvalue`.
    pub lambdas: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Mat,
    pub rank: usize,
}

impl EigenSystem {
    pub fn from_cov(cov: &Mat) -> Result<Self> {
        let (vals, vecs) = symmetric_eigen(cov)?;
        let floor = 1e-12 * cov.trace().abs();
        let eigenvalues: Vec<f64> = vals
            .iter()
            .map(|v| if *v <= floor { 0.0 } else { *v })
            .collect();
        let rank = eigenvalues.iter().filter(|v| **v > 0.0).count();
        Ok(EigenSystem {
            lambdas: eigenvalues.iter().map(|v| v.sqrt()).collect(),
            eigenvalues,
            vectors: vecs,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| self.vectors[(r, i)]).collect()
    }

    pub fn reconstruct(&self) -> Mat {
        let mut m = Mat::zeros(self.dim());
        for i in 0..self.dim() {
            m.add_outer(self.eigenvalues[i], &self.vector(i));
        }
        m
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    fn same_basis(&self, o: &EigenSystem) -> bool {
        self.rank == o.rank
            && self
                .vectors
                .rows()
                .iter()
                .flatten()
                .zip(o.vectors.rows().iter().flatten())
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }

    /// Index of a matching basis in `cache`, inserting this one if new.
    pub(crate) fn basis_slot(&self, cache: &mut Vec<EigenSystem>) -> usize {
        if let Some(i) = cache.iter().position(|e| e.same_basis(self)) {
            return i;
        }
        cache.push(self.clone());
        cache.len() - 1
    }
}

/// Eigen-system of `trunc_cov(c_n)` at `n = e^{ln_n}`.
pub fn eigensystem(model: &MomentModel, seq: &NormalizerSeq, ln_n: f64) -> Result<EigenSystem> {
    EigenSystem::from_cov(&model.trunc_cov_ln(seq.ln_c(ln_n)))
}
