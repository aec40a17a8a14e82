//! Dirichlet energy, the taut-string minimizer over sup-norm tubes, and the
//! geometry of the Strassen ball `𝒦 = {g : I(g) ≤ 1}` on grids.

use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Result};
use crate::grid::GridFn;
use crate::linalg::{dot, norm};

/// Bisection tolerance on ε for [`dist_to_scaled_strassen`].
pub const DIST_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub finite: bool,
}

impl EnergyValue {
    fn of(value: f64) -> Self {
        EnergyValue {
            value,
            finite: value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSolution {
    pub minimizer: GridFn,
    pub energy: EnergyValue,
    pub epsilon: f64,
}

/// `N · Σ (Δg)²`, the exact energy of the piecewise-linear interpolant.
pub fn dirichlet_energy(g: &GridFn) -> Result<EnergyValue> {
    Ok(EnergyValue::of(energy_of(g.scalar_values()?)))
}

pub(crate) fn energy_of(v: &[f64]) -> f64 {
    let n = (v.len() - 1) as f64;
    n * v.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum::<f64>()
}

/// Total energy `∫|f'|²` of a vector-valued grid function.
pub fn vector_energy(f: &GridFn) -> f64 {
    f.coordinates().iter().map(|c| energy_of(c.values())).sum()
}

/// Minimizer of the Dirichlet energy over `{h : h(0) = 0, |h − g| ≤ ε}` on
/// the grid of `g`, with a free right end.
pub fn taut_string(g: &GridFn, epsilon: f64) -> Result<TubeSolution> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return param(format!("epsilon must be positive and finite, got {epsilon}"));
    }
    let v = g.scalar_values()?;
    let n = v.len() - 1;
    // Reflecting the tube about t = 1 turns the free end into a pinned one;
    // the symmetric minimizer restricted to [0, 1] is the free-end solution.
    let m = 2 * n;
    let mut lo = Vec::with_capacity(m + 1);
    let mut hi = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let src = if i <= n { i } else { m - i };
        lo.push(v[src] - epsilon);
        hi.push(v[src] + epsilon);
    }
    lo[0] = 0.0;
    hi[0] = 0.0;
    lo[m] = 0.0;
    hi[m] = 0.0;
    let mut path = pinned_taut_string(&lo, &hi);
    path.truncate(n + 1);
    let minimizer = GridFn::new(1, n, path)?;
    let energy = EnergyValue::of(energy_of(minimizer.values()));
    Ok(TubeSolution {
        minimizer,
        energy,
        epsilon,
    })
}

/// Shortest path through the tube `[lo_i, hi_i]` with both ends pinned
/// (`lo[0] == hi[0]`, `lo[M] == hi[M]`).
fn pinned_taut_string(lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let m = lo.len() - 1;
    let mut out = vec![0.0; m + 1];
    out[0] = lo[0];
    let mut a = 0usize;
    let mut ya = lo[0];
    while a < m {
        let mut smin = f64::NEG_INFINITY;
        let mut smax = f64::INFINITY;
        let mut imin = a;
        let mut imax = a;
        let mut i = a + 1;
        let (next, slope) = loop {
            let h = (i - a) as f64;
            let sl = (lo[i] - ya) / h;
            let su = (hi[i] - ya) / h;
            if sl > smax {
                break (imax, smax);
            }
            if su < smin {
                break (imin, smin);
            }
            if sl >= smin {
                smin = sl;
                imin = i;
            }
            if su <= smax {
                smax = su;
                imax = i;
            }
            if i == m {
                break (m, (lo[m] - ya) / h);
            }
            i += 1;
        };
        for (j, slot) in out.iter_mut().enumerate().take(next + 1).skip(a + 1) {
            *slot = ya + slope * (j - a) as f64;
        }
        ya = out[next];
        a = next;
    }
    out
}

pub fn min_energy_in_ball(g: &GridFn, epsilon: f64) -> Result<EnergyValue> {
    Ok(taut_string(g, epsilon)?.energy)
}

/// Pointwise `⟨u, f(t_i)⟩` for a unit vector `u`.
pub fn project_direction(f: &GridFn, u: &[f64]) -> Result<GridFn> {
    if u.len() != f.dim() {
        return dim(format!("direction of length {} for dim {}", u.len(), f.dim()));
    }
    if (norm(u) - 1.0).abs() > 1e-12 {
        return param(format!("direction must be a unit vector, |u| = {}", norm(u)));
    }
    project_unchecked(f, u)
}

pub(crate) fn project_unchecked(f: &GridFn, u: &[f64]) -> Result<GridFn> {
    let values = (0..=f.n_grid()).map(|i| dot(f.point(i), u)).collect();
    GridFn::new(1, f.n_grid(), values)
}

/// Sup-norm distance on the grid from `g` to `α𝒦`.
pub fn dist_to_scaled_strassen(g: &GridFn, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return param(format!("alpha must be nonnegative and finite, got {alpha}"));
    }
    let e = dirichlet_energy(g)?.value;
    let target = alpha * alpha;
    if e <= target {
        return Ok(0.0);
    }
    let sup = g.sup_norm();
    if alpha == 0.0 {
        return Ok(sup);
    }
    let (mut lo, mut hi) = (0.0, sup);
    while hi - lo > DIST_TOL * 0.5 {
        let mid = 0.5 * (lo + hi);
        if min_energy_in_ball(g, mid)?.value <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Splits `f` into `x_i = I(f_i)^{1/2}` and `g_i = f_i / x_i`.
pub fn representation_decompose(f: &GridFn) -> Result<(Vec<f64>, Vec<GridFn>)> {
    let mut xs = Vec::with_capacity(f.dim());
    let mut gs = Vec::with_capacity(f.dim());
    for c in f.coordinates() {
        let x = energy_of(c.values()).sqrt();
        if x > 0.0 {
            gs.push(c.scaled(1.0 / x));
        } else {
            gs.push(GridFn::zeros(1, f.n_grid()));
        }
        xs.push(x);
    }
    Ok((xs, gs))
}

/// `Σ_i I(⟨u_i, f⟩)` over an orthonormal basis given as rows.
pub fn parseval_energy(f: &GridFn, basis: &[Vec<f64>]) -> Result<f64> {
    check_orthonormal(basis, f.dim())?;
    let mut total = 0.0;
    for u in basis {
        total += energy_of(project_unchecked(f, u)?.values());
    }
    Ok(total)
}

pub(crate) fn check_orthonormal(basis: &[Vec<f64>], d: usize) -> Result<()> {
    if basis.len() != d || basis.iter().any(|u| u.len() != d) {
        return dim(format!("basis must be {d} vectors of length {d}"));
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot(u, v) - want).abs() > 1e-10 {
                return param(format!("basis is not orthonormal at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

/// Eight fixed unit-energy elements of `𝒦`: two lines and six one-bend
/// functions. `n_grid` must be a multiple of 4 so the bends sit on nodes.
pub fn k_sample(n_grid: usize) -> Result<Vec<GridFn>> {
    if n_grid == 0 || n_grid % 4 != 0 {
        return param("the 𝒦 sample needs n_grid divisible by 4");
    }
    // (bend location b, slope before, slope after); a²b + c²(1−b) = 1
    let shapes: [(f64, f64, f64); 8] = [
        (0.5, 1.0, 1.0),
        (0.5, -1.0, -1.0),
        (0.5, 2f64.sqrt(), 0.0),
        (0.5, 0.0, -(2f64.sqrt())),
        (0.25, 2.0, 0.0),
        (0.5, 1.2, -(0.56f64.sqrt())),
        (0.75, -(4.0f64 / 3.0).sqrt(), 0.0),
        (0.5, -1.0, 1.0),
    ];
    shapes
        .iter()
        .map(|&(b, a, c)| {
            GridFn::scalar_from_fn(n_grid, |t| if t <= b { a * t } else { a * b + c * (t - b) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, a: f64) -> GridFn {
        GridFn::scalar_from_fn(n, |t| a * t).unwrap()
    }

    #[test]
    fn energy_of_lines() {
        assert!((dirichlet_energy(&line(7, 1.0)).unwrap().value - 1.0).abs() < 1e-14);
        assert!((dirichlet_energy(&line(16, 3.0)).unwrap().value - 9.0).abs() < 1e-12);
        assert_eq!(dirichlet_energy(&GridFn::zeros(1, 5)).unwrap().value, 0.0);
        assert!(dirichlet_energy(&GridFn::zeros(2, 5)).is_err());
    }

    #[test]
    fn taut_string_line_case() {
        let sol = taut_string(&line(64, 1.0), 0.25).unwrap();
        assert!((sol.energy.value - 0.5625).abs() < 1e-12);
        for i in 0..=64 {
            assert!((sol.minimizer.values()[i] - 0.75 * i as f64 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn taut_string_small_function_is_zero() {
        let g = GridFn::scalar_from_fn(32, |t| 0.1 * (6.0 * t).sin()).unwrap();
        let sol = taut_string(&g, 0.2).unwrap();
        assert_eq!(sol.energy.value, 0.0);
        assert!(taut_string(&g, 0.0).is_err());
    }

    #[test]
    fn taut_string_stays_in_tube() {
        let g = GridFn::scalar_from_fn(50, |t| (9.0 * t).sin() + t * t).unwrap();
        let sol = taut_string(&g, 0.15).unwrap();
        assert!(sol.minimizer.sup_dist(&g).unwrap() <= 0.15 + 1e-12);
        assert_eq!(sol.minimizer.values()[0], 0.0);
    }

    #[test]
    fn distance_for_steep_line() {
        let d = dist_to_scaled_strassen(&line(64, 2.0), 1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-6, "{d}");
        assert_eq!(dist_to_scaled_strassen(&line(64, 0.5), 1.0).unwrap(), 0.0);
        assert!((dist_to_scaled_strassen(&line(8, 2.0), 0.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn projection_and_parseval() {
        let f = GridFn::from_fn(2, 8, |t| vec![t, t]).unwrap();
        let s = 0.5f64.sqrt();
        let p = project_direction(&f, &[s, s]).unwrap();
        assert!((p.values()[8] - 2f64.sqrt()).abs() < 1e-15);
        assert!(project_direction(&f, &[1.0, 1.0]).is_err());
        let th: f64 = 0.3;
        let basis = vec![vec![th.cos(), th.sin()], vec![-th.sin(), th.cos()]];
        let e = parseval_energy(&f, &basis).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
        assert!(parseval_energy(&f, &[vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn decompose_roundtrip() {
        let f = GridFn::from_fn(2, 8, |t| vec![0.5 * t, 0.0]).unwrap();
        let (x, g) = representation_decompose(&f).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1] == 0.0);
        assert!((g[0].values()[8] - 1.0).abs() < 1e-15);
        assert!(g[1].values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn k_sample_has_unit_energy() {
        for g in k_sample(64).unwrap() {
            let e = dirichlet_energy(&g).unwrap().value;
            assert!((e - 1.0).abs() < 1e-12, "{e}");
        }
        assert!(k_sample(6).is_err());
    }
}
