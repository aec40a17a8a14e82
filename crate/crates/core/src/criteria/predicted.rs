//! Predicted cluster sets: the coordinate box `α₁𝒦 × ⋯ × α_d𝒦`, the lower
//! set `{x·g : x ∈ A, g ∈ 𝒦}` and, for `d = 2`, `{(x₁g₁, x₂g₂) : x ∈ A}`.

use serde::{Deserialize, Serialize};

use crate::criteria::alpha::AlphaEstimate;
use crate::criteria::engine::Criteria;
use crate::error::{dim, Result};
use crate::grid::GridFn;
use crate::linalg::{norm, symmetric_eigen, Mat};
use crate::models::{MomentModel, StarSet};
use crate::strassen::{dist_to_scaled_strassen, k_sample, representation_decompose};

/// Descriptor of the point cluster set `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ADescriptor {
    Origin { dim: usize },
    /// `{M y : |y| ≤ 1}` for a symmetric PSD `M`.
    Ellipsoid { shape: Mat },
    Star { star: StarSet },
    Points { points: Vec<Vec<f64>> },
}

impl ADescriptor {
    pub fn dim(&self) -> usize {
        match self {
            ADescriptor::Origin { dim } => *dim,
            ADescriptor::Ellipsoid { shape } => shape.dim(),
            ADescriptor::Star { star } => star.dim(),
            ADescriptor::Points { points } => points.first().map_or(0, |p| p.len()),
        }
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            ADescriptor::Origin { .. } => norm(p),
            ADescriptor::Star { star } => star.distance(p),
            ADescriptor::Points { points } => points
                .iter()
                .map(|q| norm(&q.iter().zip(p).map(|(a, b)| a - b).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min),
            ADescriptor::Ellipsoid { shape } => ellipsoid_distance(shape, p),
        }
    }

    /// Segment endpoints and midpoints (or the analogous axis points).
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        match self {
            ADescriptor::Origin { dim } => vec![vec![0.0; *dim]],
            ADescriptor::Star { star } => star.probe_points(),
            ADescriptor::Points { points } => points.clone(),
            ADescriptor::Ellipsoid { shape } => {
                let (vals, vecs) = symmetric_eigen(shape).expect("validated shape");
                let d = shape.dim();
                let mut out = Vec::new();
                for i in 0..d {
                    if vals[i] <= 1e-12 {
                        continue;
                    }
                    for c in [1.0, -1.0, 0.5, -0.5] {
                        out.push((0..d).map(|r| c * vals[i] * vecs[(r, i)]).collect());
                    }
                }
                if out.is_empty() {
                    out.push(vec![0.0; d]);
                }
                out
            }
        }
    }
}

fn ellipsoid_distance(m: &Mat, p: &[f64]) -> f64 {
    let (vals, vecs) = symmetric_eigen(m).expect("validated shape");
    let d = m.dim();
    let coords: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|r| vecs[(r, i)] * p[r]).sum())
        .collect();
    let live: Vec<bool> = vals.iter().map(|v| *v > 1e-12).collect();
    let null_sq: f64 = (0..d).filter(|i| !live[*i]).map(|i| coords[i] * coords[i]).sum();
    let level = |mu: f64| -> f64 {
        (0..d)
            .filter(|i| live[*i])
            .map(|i| {
                let m2 = vals[i] * vals[i];
                let z = coords[i] * m2 / (m2 + mu);
                z * z / m2
            })
            .sum()
    };
    if level(0.0) <= 1.0 {
        return null_sq.sqrt();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while level(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if level(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let live_sq: f64 = (0..d)
        .filter(|i| live[*i])
        .map(|i| {
            let m2 = vals[i] * vals[i];
            let z = coords[i] * m2 / (m2 + hi);
            (coords[i] - z) * (coords[i] - z)
        })
        .sum();
    (live_sq + null_sq).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedSets {
    pub upper_box: Vec<AlphaEstimate>,
    pub alpha0: AlphaEstimate,
    pub a: ADescriptor,
    /// `{(x₁g₁, x₂g₂)}` shares the `A` descriptor; present for `d = 2`.
    pub d2_upper: bool,
}

impl PredictedSets {
    /// Sets prescribed by a star set: `A` is the star, `α₀ = 1` and
    /// `α_i = max_ℓ σ_ℓ |z_{ℓ,i}|`.
    pub fn for_star(star: &StarSet) -> Self {
        let upper_box = (0..star.dim())
            .map(|i| {
                let a = star
                    .segments()
                    .iter()
                    .map(|s| s.sigma * s.z[i].abs())
                    .fold(0.0, f64::max);
                AlphaEstimate::exact(a)
            })
            .collect();
        PredictedSets {
            upper_box,
            alpha0: AlphaEstimate::exact(1.0),
            a: ADescriptor::Star { star: star.clone() },
            d2_upper: star.dim() == 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.upper_box.len()
    }

    /// Largest `dist(f_i, α_i𝒦)` over coordinates, using upper bracket ends.
    pub fn upper_distance(&self, f: &GridFn) -> Result<f64> {
        if f.dim() != self.dim() {
            return dim("function and predicted sets differ in dimension");
        }
        let mut worst = 0.0f64;
        for (i, c) in f.coordinates().iter().enumerate() {
            worst = worst.max(dist_to_scaled_strassen(c, self.upper_box[i].upper)?);
        }
        Ok(worst)
    }

    /// Lower-set probes `x·g` for `x` among the `A` probe points and `g` in
    /// the fixed eight-element sample of `𝒦`.
    pub fn lower_probes(&self, n_grid: usize) -> Result<Vec<GridFn>> {
        let ks = k_sample(n_grid)?;
        let mut out = Vec::new();
        for x in self.a.probe_points() {
            for g in &ks {
                out.push(GridFn::outer(&x, g)?);
            }
        }
        Ok(out)
    }

    /// Distance of `(I^{1/2}(f_1), I^{1/2}(f_2))`, over sign choices, to `A`;
    /// 0 means `f` has the form `(x₁g₁, x₂g₂)` with `x ∈ A`, `g_i ∈ 𝒦`.
    pub fn d2_distance(&self, f: &GridFn) -> Result<Option<f64>> {
        if !self.d2_upper {
            return Ok(None);
        }
        let (x, _) = representation_decompose(f)?;
        let mut best = f64::INFINITY;
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                best = best.min(self.a.distance(&[s1 * x[0], s2 * x[1]]));
            }
        }
        Ok(Some(best))
    }
}

impl Criteria {
    pub fn a_descriptor(&self, alpha0: &AlphaEstimate) -> ADescriptor {
        let d = self.dim();
        if self.model.is_degenerate() {
            return ADescriptor::Origin { dim: d };
        }
        match &self.model {
            MomentModel::Example8(m) => ADescriptor::Star {
                star: m.star().clone(),
            },
            MomentModel::Gaussian(_) | MomentModel::Independent(_) => {
                // covariance ellipsoid of the untruncated law, scaled to α₀
                let cov = self.model.trunc_cov(f64::MAX);
                let lmax = crate::models::lambda_max(&cov);
                if lmax <= 0.0 || alpha0.estimate <= 0.0 || alpha0.lower == 0.0 {
                    return ADescriptor::Origin { dim: d };
                }
                let root = cov.psd_sqrt().expect("covariance is PSD");
                ADescriptor::Ellipsoid {
                    shape: root.scaled(alpha0.estimate / lmax.sqrt()),
                }
            }
        }
    }

    pub fn predicted_sets(&self) -> Result<PredictedSets> {
        let alpha0 = self.alpha0()?;
        let upper_box = self.coordinate_alphas()?;
        Ok(PredictedSets {
            a: self.a_descriptor(&alpha0),
            alpha0,
            upper_box,
            d2_upper: self.dim() == 2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipsoid_distance_to_disk_and_segment() {
        let disk = ADescriptor::Ellipsoid {
            shape: Mat::identity(2),
        };
        assert_eq!(disk.distance(&[0.3, 0.4]), 0.0);
        assert!((disk.distance(&[3.0, 4.0]) - 4.0).abs() < 1e-9);
        let seg = ADescriptor::Ellipsoid {
            shape: Mat::diag(&[2.0, 0.0]),
        };
        assert!((seg.distance(&[3.0, 1.0]) - 2f64.sqrt()).abs() < 1e-9);
        assert!((seg.distance(&[1.0, 1.0]) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn star_sets_give_coordinate_maxima() {
        let star = StarSet::new(vec![
            crate::models::Segment { sigma: 1.0, z: vec![1.0, 0.0] },
            crate::models::Segment { sigma: 0.8, z: vec![1.0, 1.0] },
        ])
        .unwrap();
        let p = PredictedSets::for_star(&star);
        assert_eq!(p.upper_box[0].estimate, 1.0);
        assert!((p.upper_box[1].estimate - 0.8 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.a.distance(&[0.5, 0.0]), 0.0);
    }

    #[test]
    fn ellipse_axes() {
        let e = ADescriptor::Ellipsoid {
            shape: Mat::diag(&[2.0, 1.0]),
        };
        assert!((e.distance(&[0.0, 3.0]) - 2.0).abs() < 1e-9);
        assert!((e.distance(&[5.0, 0.0]) - 3.0).abs() < 1e-9);
        assert_eq!(e.probe_points().len(), 8);
    }
}
