//! Membership of points in `A` and of functions in `𝒜`.
//!
//! For each `ε` of the grid the exponent on a block is `C·c_n²/2n` with
//!
//! * points: `C = Σ_{i ≤ rank} (|⟨u_i, x⟩| − ε)₊² / λ_i²`, blocks with a dead
//!   direction `|⟨u_i, x⟩| ≥ ε`, `i > rank`, dropped;
//! * functions: the same with `I^{1/2}(⟨u_i, f⟩)` and the sup-norm filter;
//! * independent coordinates: `C = Σ_i (q_i − ε)₊² / σ²_{n,i}` with
//!   `q_i = |x_i|` or `I^{1/2}(f_i)`, no filter.
//!
//! Member iff every `ε` is divergent, non-member iff some `ε` is convergent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::engine::{Criteria, FrameBlock};
use crate::criteria::series::{SeriesClass, SeriesVerdict, WindowStat};
use crate::error::{dim, Result};
use crate::grid::GridFn;
use crate::linalg::dot;
use crate::models::MomentModel;
use crate::strassen::{energy_of, project_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonVerdict {
    pub epsilon: f64,
    pub class: SeriesClass,
    pub blocks: Vec<WindowStat>,
    pub margin: f64,
    pub s_tail: Option<f64>,
    pub gamma: Option<f64>,
    pub rule: String,
    pub lean: SeriesClass,
    pub neighbors: Option<(SeriesClass, SeriesClass)>,
}

impl EpsilonVerdict {
    fn new(epsilon: f64, v: SeriesVerdict) -> Self {
        EpsilonVerdict {
            epsilon,
            class: v.class,
            blocks: v.windows,
            margin: v.margin,
            s_tail: v.s_tail,
            gamma: v.gamma,
            rule: v.rule,
            lean: v.lean,
            neighbors: v.neighbors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub verdicts: Vec<EpsilonVerdict>,
    pub overall: Membership,
    /// First `ε` (in grid order) that is not divergent.
    pub epsilon_star: Option<f64>,
}

impl MembershipVerdict {
    fn assemble(verdicts: Vec<EpsilonVerdict>) -> Self {
        let overall = if verdicts.iter().all(|v| v.class == SeriesClass::Divergent) {
            Membership::Member
        } else if verdicts.iter().any(|v| v.class == SeriesClass::Convergent) {
            Membership::NonMember
        } else {
            Membership::Undecided
        };
        let epsilon_star = verdicts
            .iter()
            .find(|v| v.class != SeriesClass::Divergent)
            .map(|v| v.epsilon);
        MembershipVerdict {
            verdicts,
            overall,
            epsilon_star,
        }
    }

    pub fn has_undecided(&self) -> bool {
        self.verdicts.iter().any(|v| v.class == SeriesClass::Undecided)
    }
}

/// `(a − ε)₊² / v` with `0/0 = 0`; `None` for a positive numerator over 0.
fn term(a: f64, eps: f64, v: f64) -> Option<f64> {
    let t = (a - eps).max(0.0);
    if t == 0.0 {
        Some(0.0)
    } else if v > 0.0 {
        Some(t * t / v)
    } else {
        None
    }
}

fn independent_coef(b: &FrameBlock, q: &[f64], eps: f64) -> Option<f64> {
    let mut c = 0.0;
    for (qi, vi) in q.iter().zip(&b.coord_var) {
        c += term(*qi, eps, *vi)?;
    }
    Some(c)
}

/// Per-direction `(|⟨u_i, ·⟩|, filter value)` for eigen directions.
fn eigen_coef(b: &FrameBlock, proj: &[(f64, f64)], eps: f64) -> Option<f64> {
    let mut c = 0.0;
    for (i, (a, sup)) in proj.iter().enumerate() {
        if i < b.eig.rank {
            c += term(*a, eps, b.eig.eigenvalues[i])?;
        } else if *sup >= eps {
            return None;
        }
    }
    Some(c)
}

impl Criteria {
    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return dim(format!("query has dimension {d}, model has {}", self.dim()));
        }
        Ok(())
    }

    fn per_epsilon(&self, coef: impl Fn(&FrameBlock, f64) -> Option<f64> + Sync) -> MembershipVerdict {
        let verdicts: Vec<EpsilonVerdict> = self
            .cfg
            .epsilons
            .par_iter()
            .map(|&eps| EpsilonVerdict::new(eps, self.frame.classify(|b| coef(b, eps), &self.cfg)))
            .collect();
        MembershipVerdict::assemble(verdicts)
    }

    fn point_projections(&self, x: &[f64]) -> Vec<Vec<(f64, f64)>> {
        self.frame
            .bases
            .iter()
            .map(|e| {
                (0..e.dim())
                    .map(|i| {
                        let a = dot(&e.vector(i), x).abs();
                        (a, a)
                    })
                    .collect()
            })
            .collect()
    }

    fn function_projections(&self, f: &GridFn) -> Vec<Vec<(f64, f64)>> {
        self.frame
            .bases
            .iter()
            .map(|e| {
                (0..e.dim())
                    .map(|i| {
                        let g = project_unchecked(f, &e.vector(i)).expect("dimension checked");
                        let v = g.values();
                        let sup = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                        (energy_of(v).sqrt(), sup)
                    })
                    .collect()
            })
            .collect()
    }

    /// Exponent coefficient `C` of a point query on one block.
    pub fn point_coefficient(&self, b: &FrameBlock, x: &[f64], eps: f64) -> Option<f64> {
        match &self.model {
            MomentModel::Independent(_) => {
                let q: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                independent_coef(b, &q, eps)
            }
            _ => {
                let proj: Vec<(f64, f64)> = (0..b.eig.dim())
                    .map(|i| {
                        let a = dot(&b.eig.vector(i), x).abs();
                        (a, a)
                    })
                    .collect();
                eigen_coef(b, &proj, eps)
            }
        }
    }

    pub fn point_membership(&self, x: &[f64]) -> Result<MembershipVerdict> {
        self.check_dim(x.len())?;
        if let MomentModel::Independent(_) = self.model {
            let q: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            return Ok(self.per_epsilon(|b, eps| independent_coef(b, &q, eps)));
        }
        let proj = self.point_projections(x);
        Ok(self.per_epsilon(|b, eps| eigen_coef(b, &proj[b.basis], eps)))
    }

    pub fn function_membership(&self, f: &GridFn) -> Result<MembershipVerdict> {
        self.check_dim(f.dim())?;
        if let MomentModel::Independent(_) = self.model {
            let q: Vec<f64> = f
                .coordinates()
                .iter()
                .map(|c| energy_of(c.values()).sqrt())
                .collect();
            return Ok(self.per_epsilon(|b, eps| independent_coef(b, &q, eps)));
        }
        let proj = self.function_projections(f);
        Ok(self.per_epsilon(|b, eps| eigen_coef(b, &proj[b.basis], eps)))
    }

    /// Exponent coefficients of a point query for every frame block.
    pub fn point_coefficients(&self, x: &[f64], eps: f64) -> Result<Vec<Option<f64>>> {
        self.check_dim(x.len())?;
        Ok(self
            .frame
            .blocks
            .iter()
            .map(|b| self.point_coefficient(b, x, eps))
            .collect())
    }

    /// Exponent coefficients of a function query for every frame block.
    pub fn function_coefficients(&self, f: &GridFn, eps: f64) -> Result<Vec<Option<f64>>> {
        self.check_dim(f.dim())?;
        if let MomentModel::Independent(_) = self.model {
            let q: Vec<f64> = f
                .coordinates()
                .iter()
                .map(|c| energy_of(c.values()).sqrt())
                .collect();
            return Ok(self.frame.blocks.iter().map(|b| independent_coef(b, &q, eps)).collect());
        }
        let proj = self.function_projections(f);
        Ok(self
            .frame
            .blocks
            .iter()
            .map(|b| eigen_coef(b, &proj[b.basis], eps))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::normalizer::NormalizerSeq;
    use crate::criteria::series::ClassifierConfig;
    use crate::linalg::Mat;
    use crate::models::GaussianModel;

    fn disk() -> Criteria {
        let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2)).unwrap());
        Criteria::new(m, NormalizerSeq::Sqrt2nLoglog, ClassifierConfig::default()).unwrap()
    }

    #[test]
    fn unit_disk_sweep() {
        let c = disk();
        let at = |r: f64| c.point_membership(&[r * 0.6, r * 0.8]).unwrap().overall;
        assert_eq!(at(0.0), Membership::Member);
        assert_eq!(at(0.5), Membership::Member);
        assert_eq!(at(0.9), Membership::Member);
        assert_eq!(at(1.1), Membership::NonMember);
        assert_eq!(at(1.5), Membership::NonMember);
    }

    #[test]
    fn function_queries() {
        let c = disk();
        let line = GridFn::from_fn(2, 32, |t| vec![1.2 * t, 0.0]).unwrap();
        let v = c.function_membership(&line).unwrap();
        assert_eq!(v.overall, Membership::NonMember);
        assert_eq!(v.epsilon_star, Some(0.2));
        let zero = GridFn::zeros(2, 16);
        assert_eq!(c.function_membership(&zero).unwrap().overall, Membership::Member);
        let s = 0.8 / 2f64.sqrt();
        let f = GridFn::from_fn(2, 64, |t| vec![s * t, s * (std::f64::consts::PI * t / 2.0).sin() * 2f64.sqrt() / std::f64::consts::PI * 2.0]).unwrap();
        assert_eq!(c.function_membership(&f).unwrap().overall, Membership::Member);
    }
}
