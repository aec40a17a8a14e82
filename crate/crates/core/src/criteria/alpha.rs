//! The limsup constants `α₀` and `α_i` by bisection over the series
//! classifier.
//!
//! With exponent `α² c_n² / (2n H)` the classification is divergent for
//! small `α` and convergent for large `α`. An undecided probe splits the
//! search into two bisections, one for each edge of the undecided band.

use serde::{Deserialize, Serialize};

use crate::criteria::engine::{Criteria, FrameBlock};
use crate::criteria::series::SeriesClass;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub estimate: f64,
    pub half_width: f64,
    /// Largest `α` classified divergent.
    pub lower: f64,
    /// Smallest `α` classified convergent.
    pub upper: f64,
    pub undecided_band: Option<(f64, f64)>,
    pub evaluations: usize,
}

impl AlphaEstimate {
    pub fn exact(v: f64) -> Self {
        AlphaEstimate {
            estimate: v,
            half_width: 0.0,
            lower: v,
            upper: v,
            undecided_band: None,
            evaluations: 0,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// `α²/h` with `0·∞ = 0`; `None` when `h = 0 < α`.
fn alpha_coef(alpha: f64, h: f64) -> Option<f64> {
    if alpha == 0.0 {
        Some(0.0)
    } else if h > 0.0 {
        Some(alpha * alpha / h)
    } else {
        None
    }
}

impl Criteria {
    fn alpha_search(&self, h: impl Fn(&FrameBlock) -> f64) -> Result<AlphaEstimate> {
        let mut evals = 0usize;
        let mut classify = |a: f64| {
            evals += 1;
            self.frame.classify(|b| alpha_coef(a, h(b)), &self.cfg).class
        };
        let tol = self.cfg.alpha_tol;
        if classify(0.0) != SeriesClass::Divergent {
            return Err(Error::Undecided(
                "the series at α = 0 is not divergent; the frame has no tail mass".into(),
            ));
        }
        let mut hi = self.cfg.alpha_hi;
        while classify(hi) != SeriesClass::Convergent {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(Error::Undecided(format!(
                    "no convergent α found up to {}",
                    hi / 2.0
                )));
            }
        }
        let (mut a_div, mut a_conv) = (0.0, hi);
        let mut band = None;
        while a_conv - a_div > tol {
            let mid = 0.5 * (a_div + a_conv);
            match classify(mid) {
                SeriesClass::Divergent => a_div = mid,
                SeriesClass::Convergent => a_conv = mid,
                SeriesClass::Undecided => {
                    let (mut u_lo, mut u_hi) = (mid, mid);
                    while u_lo - a_div > tol {
                        let m = 0.5 * (a_div + u_lo);
                        if classify(m) == SeriesClass::Divergent {
                            a_div = m;
                        } else {
                            u_lo = m;
                        }
                    }
                    while a_conv - u_hi > tol {
                        let m = 0.5 * (u_hi + a_conv);
                        if classify(m) == SeriesClass::Convergent {
                            a_conv = m;
                        } else {
                            u_hi = m;
                        }
                    }
                    band = Some((u_lo, u_hi));
                    break;
                }
            }
        }
        Ok(AlphaEstimate {
            estimate: 0.5 * (a_div + a_conv),
            half_width: 0.5 * (a_conv - a_div),
            lower: a_div,
            upper: a_conv,
            undecided_band: band,
            evaluations: evals,
        })
    }

    /// `α₀` with `H = λ_max(trunc_cov(c_n))`.
    pub fn alpha0(&self) -> Result<AlphaEstimate> {
        if self.model.is_degenerate() {
            return Ok(AlphaEstimate::exact(0.0));
        }
        self.alpha_search(|b| b.h())
    }

    /// `α_i` with `H` replaced by the coordinate truncated variance.
    pub fn coordinate_alphas(&self) -> Result<Vec<AlphaEstimate>> {
        (0..self.dim())
            .map(|i| {
                if self.frame.blocks.iter().all(|b| b.coord_var[i] == 0.0) {
                    return Ok(AlphaEstimate::exact(0.0));
                }
                self.alpha_search(|b| b.coord_var[i])
            })
            .collect()
    }
}
