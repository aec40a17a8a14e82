//! Partial sums `S_n / c_n` at geometric checkpoints and the interpolated
//! partial-sum process `s_n(t) = S_(n)(t) / c_n` on a grid.

use serde::{Deserialize, Serialize};

use crate::criteria::NormalizerSeq;
use crate::error::{param, Result};
use crate::grid::GridFn;
use crate::models::MomentModel;
use crate::sim::rng::RngStream;

/// Distinct values `⌈θ^k⌉ ≤ n_max`, `k = 0, 1, …`, in increasing order.
pub fn checkpoints(n_max: u64, theta: f64) -> Result<Vec<u64>> {
    if !(theta > 1.0) || !theta.is_finite() {
        return param(format!("checkpoint ratio must exceed 1, got {theta}"));
    }
    if n_max == 0 {
        return param("n_max must be at least 1");
    }
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let v = theta.powi(k).ceil();
        if v > n_max as f64 {
            break;
        }
        let v = v as u64;
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u64,
    /// `S_n / c_n`.
    pub point: Vec<f64>,
}

/// Cumulative sums `S_0 = 0, S_1, …, S_n` of one replica, row-major.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    sums: Vec<f64>,
}

impl Trajectory {
    /// Draws `n` summands from `model` in order.
    pub fn simulate(model: &MomentModel, n: u64, rng: &mut RngStream) -> Result<Self> {
        if !model.has_sampler() {
            return Err(crate::error::Error::Capability(format!(
                "the {} model has no sampler",
                model.kind()
            )));
        }
        let d = model.dim();
        let mut sums = Vec::with_capacity(d * (n as usize + 1));
        sums.extend(std::iter::repeat_n(0.0, d));
        for j in 0..n as usize {
            let x = model.sample(rng)?;
            for (i, xi) in x.iter().enumerate() {
                let s = sums[j * d + i] + xi;
                if !s.is_finite() {
                    return param(format!("partial sum left the float range at n = {}", j + 1));
                }
                sums.push(s);
            }
        }
        Ok(Trajectory { dim: d, sums })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> u64 {
        (self.sums.len() / self.dim - 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `S_k`.
    pub fn sum(&self, k: u64) -> &[f64] {
        let k = k as usize;
        &self.sums[k * self.dim..(k + 1) * self.dim]
    }

    /// `S_n / c` at each listed `n`.
    pub fn checkpoints(&self, ns: &[u64], seq: &NormalizerSeq) -> Vec<Checkpoint> {
        ns.iter()
            .filter(|n| **n <= self.len())
            .map(|&n| {
                let c = seq.c(n as f64);
                Checkpoint {
                    n,
                    point: self.sum(n).iter().map(|v| v / c).collect(),
                }
            })
            .collect()
    }

    /// `S_(n)(t) / c` at `t = i / grid`, with
    /// `S_(n)(t) = S_[nt] + (nt − [nt]) X_[nt]+1`.
    pub fn snapshot(&self, n: u64, grid: usize, c: f64) -> Result<GridFn> {
        if n == 0 || n > self.len() {
            return param(format!("snapshot index {n} outside 1..={}", self.len()));
        }
        let d = self.dim;
        let g = grid as u128;
        let mut values = Vec::with_capacity(d * (grid + 1));
        for i in 0..=grid as u128 {
            let prod = n as u128 * i;
            let k = (prod / g) as u64;
            let rem = prod % g;
            let lo = self.sum(k);
            if rem == 0 {
                values.extend(lo.iter().map(|v| v / c));
            } else {
                let frac = rem as f64 / g as f64;
                let hi = self.sum(k + 1);
                values.extend(lo.iter().zip(hi).map(|(a, b)| (a + frac * (b - a)) / c));
            }
        }
        GridFn::new(d, grid, values)
    }
}

/// `(n, S_n / c_n)` at the checkpoints `⌈θ^k⌉ ≤ n_max`, in generation order.
pub fn simulate_partial_sums(
    model: &MomentModel,
    seq: &NormalizerSeq,
    n_max: u64,
    theta: f64,
    rng: &mut RngStream,
) -> Result<Vec<Checkpoint>> {
    let ns = checkpoints(n_max, theta)?;
    Ok(Trajectory::simulate(model, n_max, rng)?.checkpoints(&ns, seq))
}

/// `s_n` on a grid of `grid_size` cells from `n` fresh draws.
pub fn simulate_path_process(
    model: &MomentModel,
    seq: &NormalizerSeq,
    n: u64,
    grid_size: usize,
    rng: &mut RngStream,
) -> Result<GridFn> {
    Trajectory::simulate(model, n, rng)?.snapshot(n, grid_size, seq.c(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::models::GaussianModel;

    fn gauss(d: usize) -> MomentModel {
        MomentModel::Gaussian(GaussianModel::new(Mat::identity(d)).unwrap())
    }

    #[test]
    fn checkpoint_grid() {
        let c = checkpoints(20, 1.1).unwrap();
        assert_eq!(&c[..4], &[1, 2, 3, 4]);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(*c.last().unwrap() <= 20);
        assert!(checkpoints(10, 1.0).is_err());
    }

    #[test]
    fn aligned_grid_gives_partial_sums() {
        let m = gauss(1);
        let t = Trajectory::simulate(&m, 8, &mut RngStream::new(1, 0)).unwrap();
        let s = t.snapshot(8, 8, 2.0).unwrap();
        for i in 0..=8 {
            assert_eq!(s.values()[i], t.sum(i as u64)[0] / 2.0);
        }
    }

    #[test]
    fn single_step_is_a_line() {
        let m = gauss(2);
        let t = Trajectory::simulate(&m, 1, &mut RngStream::new(3, 0)).unwrap();
        let s = t.snapshot(1, 4, 1.0).unwrap();
        let x = t.sum(1);
        for i in 0..=4 {
            let tt = i as f64 / 4.0;
            for k in 0..2 {
                assert!((s.point(i)[k] - tt * x[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn endpoint_matches_checkpoint() {
        let m = gauss(2);
        let seq = NormalizerSeq::Sqrt2nLoglog;
        let pts = simulate_partial_sums(&m, &seq, 500, 1.1, &mut RngStream::new(9, 2)).unwrap();
        let last = pts.last().unwrap();
        let f = simulate_path_process(&m, &seq, last.n, 64, &mut RngStream::new(9, 2)).unwrap();
        assert_eq!(f.point(64), &last.point[..]);
    }

    #[test]
    fn degenerate_law_stays_at_zero() {
        let m = MomentModel::Gaussian(GaussianModel::new(Mat::zeros(2)).unwrap());
        let pts =
            simulate_partial_sums(&m, &NormalizerSeq::Sqrt2nLoglog, 100, 1.1, &mut RngStream::new(0, 0))
                .unwrap();
        assert!(pts.iter().all(|c| c.point.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn antithetic_streams_flip_first_draw() {
        let m = gauss(1);
        let a = RngStream::new(5, 0);
        let pa = simulate_partial_sums(&m, &NormalizerSeq::Sqrt2nLoglog, 1, 1.1, &mut a.clone()).unwrap();
        let pb =
            simulate_partial_sums(&m, &NormalizerSeq::Sqrt2nLoglog, 1, 1.1, &mut a.antithetic()).unwrap();
        assert_eq!(pa[0].point[0], -pb[0].point[0]);
    }

    #[test]
    fn hartman_wintner_band() {
        let m = gauss(1);
        let seq = NormalizerSeq::Sqrt2nLoglog;
        let t = Trajectory::simulate(&m, 100_000, &mut RngStream::new(2026, 0)).unwrap();
        let mx = (1..=100_000u64)
            .map(|n| t.sum(n)[0].abs() / seq.c(n as f64))
            .fold(0.0, f64::max);
        assert!((0.5..=1.5).contains(&mx), "{mx}");
    }
}
