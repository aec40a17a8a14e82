//! Centered Gaussian vectors `N(0, Σ)`.

use statrs::function::gamma::gamma_lr;

use crate::error::{param, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::models::chisq::gen_chisq_cdf;
use crate::sim::rng::RngStream;

#[derive(Debug, Clone)]
pub struct GaussianModel {
    cov: Mat,
    sqrt: Mat,
    eig_vals: Vec<f64>,
    eig_vecs: Mat,
}

impl GaussianModel {
    pub fn new(cov: Mat) -> Result<Self> {
        if cov.dim() == 0 {
            return param("covariance must be at least 1 x 1");
        }
        let (vals, vecs) = symmetric_eigen(&cov)?;
        let floor = -1e-10 * cov.trace().abs().max(1.0);
        if vals.iter().any(|v| *v < floor) {
            return param("covariance must be positive semidefinite");
        }
        let eig_vals: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let sqrt = cov.psd_sqrt()?;
        Ok(GaussianModel {
            cov,
            sqrt,
            eig_vals,
            eig_vecs: vecs,
        })
    }

    pub fn dim(&self) -> usize {
        self.cov.dim()
    }

    pub fn cov(&self) -> &Mat {
        &self.cov
    }

    /// `P(|X| > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        let terms: Vec<(f64, f64)> = self.eig_vals.iter().map(|s| (*s, 1.0)).collect();
        1.0 - gen_chisq_cdf(&terms, t * t)
    }

    /// `E[X Xᵀ 1{|X| ≤ t}]`.
    pub fn trunc_cov(&self, t: f64) -> Mat {
        let d = self.dim();
        if t <= 0.0 {
            return Mat::zeros(d);
        }
        if t * t >= 64.0 * self.cov.trace() {
            return self.cov.clone();
        }
        // In the eigenbasis the off-diagonal terms vanish by symmetry and
        // E[ξ_i² 1{Σ s_j ξ_j² ≤ t²}] = P(s_i χ²_3 + Σ_{j≠i} s_j χ²_1 ≤ t²).
        let mut out = Mat::zeros(d);
        for i in 0..d {
            let s = self.eig_vals[i];
            if s <= 0.0 {
                continue;
            }
            let terms: Vec<(f64, f64)> = self
                .eig_vals
                .iter()
                .enumerate()
                .map(|(j, sj)| (*sj, if j == i { 3.0 } else { 1.0 }))
                .collect();
            let w = s * gen_chisq_cdf(&terms, t * t);
            let col: Vec<f64> = (0..d).map(|r| self.eig_vecs[(r, i)]).collect();
            out.add_outer(w, &col);
        }
        out
    }

    /// `E[X_i² 1{|X_i| ≤ t}]`.
    pub fn coord_trunc_var(&self, i: usize, t: f64) -> f64 {
        normal_trunc_var(self.cov[(i, i)].max(0.0).sqrt(), t)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let xi: Vec<f64> = (0..self.dim()).map(|_| rng.normal()).collect();
        self.sqrt.mul_vec(&xi)
    }
}

/// `E[Y² 1{|Y| ≤ t}]` for `Y ~ N(0, σ²)`.
pub fn normal_trunc_var(sigma: f64, t: f64) -> f64 {
    if sigma == 0.0 || t <= 0.0 {
        return 0.0;
    }
    let a = t / sigma;
    if a > 40.0 {
        return sigma * sigma;
    }
    // E[Y² 1{|Y| ≤ t}] = σ² P(χ²_3 ≤ a²)
    sigma * sigma * gamma_lr(1.5, 0.5 * a * a)
}
