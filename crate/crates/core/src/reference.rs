//! Brute-force reference solver for the tube-constrained energy problem.
//!
//! Accelerated projected gradient (FISTA with adaptive restart) on
//! `N · Σ (h_i − h_{i−1})²` over the box `|h_i − g_i| ≤ ε`, `h_0 = 0`.
//! Slow but shares no logic with the taut-string walk.

use crate::error::{param, Result};
use crate::grid::GridFn;
use crate::strassen::energy_of;

pub const MAX_ITERS: usize = 400_000;

pub fn qp_tube_energy(g: &GridFn, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return param("epsilon must be positive");
    }
    let v = g.scalar_values()?;
    Ok(energy_of(&qp_tube_minimizer(v, epsilon)))
}

pub fn qp_tube_minimizer(g: &[f64], epsilon: f64) -> Vec<f64> {
    let n = g.len() - 1;
    let nf = n as f64;
    let lo: Vec<f64> = g.iter().map(|v| v - epsilon).collect();
    let hi: Vec<f64> = g.iter().map(|v| v + epsilon).collect();
    let project = |h: &mut [f64]| {
        h[0] = 0.0;
        for i in 1..=n {
            h[i] = h[i].clamp(lo[i], hi[i]);
        }
    };
    let step = 1.0 / (8.0 * nf);
    let mut x = vec![0.0; n + 1];
    project(&mut x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut grad = vec![0.0; n + 1];
    let mut f_prev = energy_of(&x);
    for _ in 0..MAX_ITERS {
        for i in 1..=n {
            let left = y[i] - y[i - 1];
            let right = if i < n { y[i + 1] - y[i] } else { 0.0 };
            grad[i] = 2.0 * nf * (left - right);
        }
        let mut x_new: Vec<f64> = y.iter().zip(&grad).map(|(a, b)| a - step * b).collect();
        project(&mut x_new);
        let f_new = energy_of(&x_new);
        let moved: f64 = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if f_new > f_prev {
            // restart momentum
            t = 1.0;
            y.clone_from(&x);
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        for i in 0..=n {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        x = x_new;
        t = t_new;
        f_prev = f_new;
        if moved < 1e-14 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qp_line_case() {
        let g = GridFn::scalar_from_fn(32, |t| t).unwrap();
        let e = qp_tube_energy(&g, 0.25).unwrap();
        assert!((e - 0.5625).abs() < 1e-8, "{e}");
    }
}
