//! Brownian surrogates `Γ W_(n) / c_n`, small-ball frequencies and the
//! exponential bounds they are compared against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Result};
use crate::grid::GridFn;
use crate::linalg::Mat;
use crate::sim::rng::RngStream;
use crate::strassen::min_energy_in_ball;

/// Replicas per independent child stream in [`small_ball_estimate`].
pub const CHUNK: usize = 4096;

/// `scale · W(n t) / c_n` on `grid` cells; increments are drawn in node
/// order, coordinate by coordinate.
pub fn brownian_path(n: u64, grid: usize, scale: &Mat, c_n: f64, rng: &mut RngStream) -> Result<GridFn> {
    let mut buf = Vec::new();
    brownian_into(n, grid, scale, c_n, rng, &mut buf)?;
    GridFn::new(scale.dim(), grid, buf)
}

fn brownian_into(
    n: u64,
    grid: usize,
    scale: &Mat,
    c_n: f64,
    rng: &mut RngStream,
    out: &mut Vec<f64>,
) -> Result<()> {
    if grid == 0 || n == 0 {
        return param("brownian_path needs n ≥ 1 and grid ≥ 1");
    }
    if !(c_n > 0.0) || !c_n.is_finite() {
        return param(format!("c_n must be positive and finite, got {c_n}"));
    }
    let d = scale.dim();
    let step = (n as f64 / grid as f64).sqrt();
    let mut w = vec![0.0; d];
    out.clear();
    out.extend(std::iter::repeat_n(0.0, d));
    for _ in 0..grid {
        for wi in w.iter_mut() {
            *wi += step * rng.normal();
        }
        out.extend(scale.mul_vec(&w).into_iter().map(|v| v / c_n));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallBall {
    pub radius: f64,
    pub p_hat: f64,
    /// Binomial standard error `√(p̂(1 − p̂)/reps)`.
    pub se: f64,
    pub hits: u64,
    pub reps: u64,
}

impl SmallBall {
    fn from_hits(radius: f64, hits: u64, reps: u64) -> Self {
        let p = hits as f64 / reps as f64;
        SmallBall {
            radius,
            p_hat: p,
            se: (p * (1.0 - p) / reps as f64).sqrt(),
            hits,
            reps,
        }
    }
}

/// Frequencies of `‖scale W_(n)/c_n − f‖ < r` for each radius, all from the
/// same `reps` paths on the grid of `f`. Chunk `i` of [`CHUNK`] paths uses
/// `rng.child(i)`, so the result does not depend on the worker count.
pub fn small_ball_radii(
    f: &GridFn,
    scale: &Mat,
    c_n: f64,
    n: u64,
    radii: &[f64],
    reps: usize,
    rng: &RngStream,
) -> Result<Vec<SmallBall>> {
    if f.dim() != scale.dim() {
        return dim("target function and scale matrix differ in dimension");
    }
    if reps == 0 {
        return param("reps must be at least 1");
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return param("radii must be positive");
    }
    let chunks = reps.div_ceil(CHUNK);
    let counts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|ci| -> Result<Vec<u64>> {
            let mut r = rng.child(ci as u64);
            let mut buf = Vec::new();
            let mut hits = vec![0u64; radii.len()];
            let m = CHUNK.min(reps - ci * CHUNK);
            for _ in 0..m {
                brownian_into(n, f.n_grid(), scale, c_n, &mut r, &mut buf)?;
                let dist = buf
                    .chunks(f.dim())
                    .zip(f.values().chunks(f.dim()))
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .fold(0.0, f64::max)
                    .sqrt();
                for (h, rad) in hits.iter_mut().zip(radii) {
                    if dist < *rad {
                        *h += 1;
                    }
                }
            }
            Ok(hits)
        })
        .collect::<Result<_>>()?;
    Ok(radii
        .iter()
        .enumerate()
        .map(|(k, r)| SmallBall::from_hits(*r, counts.iter().map(|c| c[k]).sum(), reps as u64))
        .collect())
}

pub fn small_ball_estimate(
    f: &GridFn,
    scale: &Mat,
    c_n: f64,
    n: u64,
    epsilon: f64,
    reps: usize,
    rng: &RngStream,
) -> Result<SmallBall> {
    Ok(small_ball_radii(f, scale, c_n, n, &[epsilon], reps, rng)?[0])
}

/// Exponential small-ball bounds for a scalar target, with
/// `κ = I(f_ε̃) c_n² / (2 n λ²)`:
/// `P(ball of 2ε̃) ≥ ½ e^{−κ}` and `P(ball of ε̃) ≤ e^{−κ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KllBounds {
    pub eps_tilde: f64,
    pub energy: f64,
    pub kappa: f64,
    /// Lower bound for the ball of radius `2ε̃`.
    pub lower: f64,
    /// Upper bound for the ball of radius `ε̃`.
    pub upper: f64,
    /// `σ = √n λ / c_n`, the scale of the centred noise.
    pub sigma: f64,
    /// `P(σ‖W‖ < ε̃)`; the `½` form needs this to be at least `½`.
    pub centred: f64,
    /// `e^{−κ} P(σ‖W‖ < ε̃)`, valid for every `n`.
    pub exact_lower: f64,
}

pub fn kll_bounds(f: &GridFn, lambda: f64, c_n: f64, n: u64, eps_tilde: f64) -> Result<KllBounds> {
    if !(lambda > 0.0) {
        return param("λ must be positive");
    }
    let energy = min_energy_in_ball(f, eps_tilde)?.value;
    let kappa = energy * c_n * c_n / (2.0 * n as f64 * lambda * lambda);
    let sigma = (n as f64).sqrt() * lambda / c_n;
    let centred = sup_abs_cdf(eps_tilde / sigma);
    Ok(KllBounds {
        eps_tilde,
        energy,
        kappa,
        lower: 0.5 * (-kappa).exp(),
        upper: (-kappa).exp(),
        sigma,
        centred,
        exact_lower: (-kappa).exp() * centred,
    })
}

/// `P(sup_{[0,1]} |W| < x)` for standard Brownian motion.
pub fn sup_abs_cdf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let a = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
    let mut sum = 0.0;
    for k in 0..100_000u32 {
        let m = (2 * k + 1) as f64;
        let term = (-m * m * a).exp() / m;
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (4.0 / std::f64::consts::PI * sum).clamp(0.0, 1.0)
}

/// Monte Carlo frequencies at radii `2ε̃` and `ε̃` against [`KllBounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub bounds: KllBounds,
    pub outer: SmallBall,
    pub inner: SmallBall,
    /// `½e^{−κ} ≤ p̂(2ε̃) + 3 SE`.
    pub lower_ok: bool,
    /// `p̂(ε̃) − 3 SE ≤ e^{−κ}`.
    pub upper_ok: bool,
    /// `e^{−κ} P(σ‖W‖ < ε̃) ≤ p̂(2ε̃) + 3 SE`.
    pub exact_lower_ok: bool,
    /// Both frequencies rest on at least 100 hits.
    pub reliable: bool,
    /// `P(σ‖W‖ < ε̃) ≥ ½`, where the `½` lower bound applies.
    pub in_regime: bool,
}

impl Sandwich {
    /// The pair as stated, checked only where it applies, plus the exact lower bound.
    pub fn holds(&self) -> bool {
        self.upper_ok && self.exact_lower_ok && (self.lower_ok || !self.in_regime)
    }
}

pub fn small_ball_sandwich(
    f: &GridFn,
    lambda: f64,
    c_n: f64,
    n: u64,
    eps_tilde: f64,
    reps: usize,
    rng: &RngStream,
) -> Result<Sandwich> {
    let bounds = kll_bounds(f, lambda, c_n, n, eps_tilde)?;
    let scale = Mat::diag(&[lambda]);
    let est = small_ball_radii(f, &scale, c_n, n, &[2.0 * eps_tilde, eps_tilde], reps, rng)?;
    let (outer, inner) = (est[0], est[1]);
    Ok(Sandwich {
        bounds,
        outer,
        inner,
        lower_ok: bounds.lower <= outer.p_hat + 3.0 * outer.se,
        upper_ok: inner.p_hat - 3.0 * inner.se <= bounds.upper,
        exact_lower_ok: bounds.exact_lower <= outer.p_hat + 3.0 * outer.se,
        reliable: outer.hits >= 100 && inner.hits >= 100,
        in_regime: bounds.centred >= 0.5,
    })
}

/// `exp(C/x² − xλ/2 − λ²/2)`, the tail bound for `d(W, λ𝒦) ≥ x` with an
/// unspecified absolute constant `C`; informational only.
pub fn talagrand_bound(x: f64, lambda: f64, c: f64) -> f64 {
    (c / (x * x) - x * lambda / 2.0 - lambda * lambda / 2.0).exp()
}
