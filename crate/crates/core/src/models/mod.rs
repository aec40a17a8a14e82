//! Distribution descriptors with analytic truncated moments.
//!
//! Every model answers `trunc_cov(t) = E[X Xᵀ 1{|X| ≤ t}]` (for the block
//! model the truncation is on `|Z|`), coordinate truncated variances and tail
//! probabilities. Models with finite-precision laws can also be sampled.
//! Queries come in two flavours: `t` as a float, and `ln t` for thresholds
//! beyond the float range.

pub mod chisq;
pub mod example8;
pub mod gaussian;
pub mod independent;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::sim::rng::RngStream;

pub use example8::{Example8Mode, Example8Model, Pos, Segment, StarSet};
pub use gaussian::GaussianModel;
pub use independent::{CoordinateLaw, IndependentModel};

#[derive(Debug, Clone)]
pub enum MomentModel {
    Gaussian(GaussianModel),
    Independent(IndependentModel),
    Example8(Example8Model),
}

impl MomentModel {
    pub fn kind(&self) -> &'static str {
        match self {
            MomentModel::Gaussian(_) => "gaussian",
            MomentModel::Independent(_) => "independent_components",
            MomentModel::Example8(m) => match m.mode() {
                Example8Mode::ExactLog => "example8_exact",
                Example8Mode::Scaled => "example8_scaled",
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MomentModel::Gaussian(m) => m.dim(),
            MomentModel::Independent(m) => m.dim(),
            MomentModel::Example8(m) => m.dim(),
        }
    }

    pub fn example8(&self) -> Option<&Example8Model> {
        match self {
            MomentModel::Example8(m) => Some(m),
            _ => None,
        }
    }

    pub fn trunc_cov(&self, t: f64) -> Mat {
        match self {
            MomentModel::Gaussian(m) => m.trunc_cov(t),
            MomentModel::Independent(m) => {
                let v: Vec<f64> = (0..m.dim()).map(|i| m.coord_trunc_var(i, t)).collect();
                Mat::diag(&v)
            }
            MomentModel::Example8(m) => {
                if t <= 0.0 {
                    Mat::zeros(m.dim())
                } else {
                    m.trunc_cov_ln(t.ln())
                }
            }
        }
    }

    /// `trunc_cov` at `t = e^{ln_t}`; thresholds past `f64::MAX` saturate
    /// for the light-tailed kinds.
    pub fn trunc_cov_ln(&self, ln_t: f64) -> Mat {
        match self {
            MomentModel::Example8(m) => m.trunc_cov_ln(ln_t),
            _ => self.trunc_cov(ln_t.exp().min(f64::MAX)),
        }
    }

    /// `σ²_{t,i}`: coordinate truncated second moment. The block model uses
    /// the diagonal of its `|Z|`-truncated covariance.
    pub fn coord_trunc_var(&self, i: usize, t: f64) -> f64 {
        match self {
            MomentModel::Gaussian(m) => m.coord_trunc_var(i, t),
            MomentModel::Independent(m) => m.coord_trunc_var(i, t),
            MomentModel::Example8(_) => self.trunc_cov(t)[(i, i)],
        }
    }

    pub fn coord_trunc_var_ln(&self, i: usize, ln_t: f64) -> f64 {
        match self {
            MomentModel::Example8(m) => m.trunc_cov_ln(ln_t)[(i, i)],
            _ => self.coord_trunc_var(i, ln_t.exp().min(f64::MAX)),
        }
    }

    /// Directional sup of the truncated second moment, `λ_max(trunc_cov)`.
    pub fn h_x_ln(&self, ln_t: f64) -> f64 {
        lambda_max(&self.trunc_cov_ln(ln_t))
    }

    pub fn tail(&self, t: f64) -> Result<f64> {
        match self {
            MomentModel::Gaussian(m) => Ok(m.tail(t)),
            MomentModel::Independent(m) => m.tail(t),
            MomentModel::Example8(m) => Ok(m.tail(t)),
        }
    }

    pub fn has_sampler(&self) -> bool {
        match self {
            MomentModel::Example8(m) => m.has_sampler(),
            _ => true,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        match self {
            MomentModel::Gaussian(m) => Ok(m.sample(rng)),
            MomentModel::Independent(m) => Ok(m.sample(rng)),
            MomentModel::Example8(m) => m.sample_xz(rng).map(|(x, _)| x),
        }
    }

    pub fn sample_x(&self, rng: &mut RngStream, count: usize) -> Result<Vec<Vec<f64>>> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    /// True when the law is the point mass at 0.
    pub fn is_degenerate(&self) -> bool {
        match self {
            MomentModel::Gaussian(m) => m.cov().frobenius() == 0.0,
            MomentModel::Independent(m) => m.laws().iter().all(|l| l.variance() == 0.0),
            MomentModel::Example8(_) => false,
        }
    }
}

pub fn lambda_max(m: &Mat) -> f64 {
    symmetric_eigen(m)
        .map(|(v, _)| v.first().copied().unwrap_or(0.0).max(0.0))
        .unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gaussian,
    IndependentComponents,
    Example8,
    Example8Exact,
    Example8Scaled,
}

pub const DEFAULT_KAPPA: f64 = 8.0;
pub const DEFAULT_K_MAX: u32 = 2;

/// Declarative model descriptor: `{kind, cov | coordinate_laws |
/// {star_set, mode, kappa, k_max}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_laws: Option<Vec<CoordinateLaw>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_set: Option<StarSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Example8Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
}

fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

impl ModelConfig {
    pub fn gaussian(cov: Vec<Vec<f64>>) -> Self {
        ModelConfig {
            kind: ModelKind::Gaussian,
            cov: Some(cov),
            coordinate_laws: None,
            star_set: None,
            mode: None,
            kappa: None,
            k_max: None,
        }
    }

    pub fn example8(star: StarSet, mode: Example8Mode) -> Self {
        ModelConfig {
            kind: ModelKind::Example8,
            cov: None,
            coordinate_laws: None,
            star_set: Some(star),
            mode: Some(mode),
            kappa: None,
            k_max: None,
        }
    }

    /// The same descriptor with every default spelled out.
    pub fn resolved(&self) -> Result<ModelConfig> {
        let mut c = self.clone();
        let stray = |field: &str, present: bool| -> Result<()> {
            if present {
                input(format!("model.{field} is not used by kind {:?}", self.kind))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ModelKind::Gaussian => {
                if c.cov.is_none() {
                    return input("model.cov is required for kind \"gaussian\"");
                }
                stray("coordinate_laws", c.coordinate_laws.is_some())?;
                stray("star_set", c.star_set.is_some())?;
                stray("mode", c.mode.is_some())?;
                stray("kappa", c.kappa.is_some())?;
                stray("k_max", c.k_max.is_some())?;
            }
            ModelKind::IndependentComponents => {
                if c.coordinate_laws.is_none() {
                    return input(
                        "model.coordinate_laws is required for kind \"independent_components\"",
                    );
                }
                stray("cov", c.cov.is_some())?;
                stray("star_set", c.star_set.is_some())?;
                stray("mode", c.mode.is_some())?;
                stray("kappa", c.kappa.is_some())?;
                stray("k_max", c.k_max.is_some())?;
            }
            ModelKind::Example8 | ModelKind::Example8Exact | ModelKind::Example8Scaled => {
                if c.star_set.is_none() {
                    return input("model.star_set is required for the block model");
                }
                stray("cov", c.cov.is_some())?;
                stray("coordinate_laws", c.coordinate_laws.is_some())?;
                let implied = match self.kind {
                    ModelKind::Example8Exact => Some(Example8Mode::ExactLog),
                    ModelKind::Example8Scaled => Some(Example8Mode::Scaled),
                    _ => None,
                };
                let mode = match (implied, c.mode) {
                    (Some(a), Some(b)) if a != b => {
                        return input(format!(
                            "model.mode {b:?} contradicts kind {:?}",
                            self.kind
                        ))
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => Example8Mode::ExactLog,
                };
                c.kind = ModelKind::Example8;
                c.mode = Some(mode);
                if mode == Example8Mode::Scaled {
                    c.kappa.get_or_insert(DEFAULT_KAPPA);
                    c.k_max.get_or_insert(DEFAULT_K_MAX);
                } else {
                    stray("kappa", c.kappa.is_some())?;
                    c.k_max.get_or_insert(3);
                }
            }
        }
        Ok(c)
    }

    pub fn build(&self) -> Result<MomentModel> {
        let c = self.resolved()?;
        let with_field = |field: &'static str| move |e: Error| Error::Input(format!("model.{field}: {e}"));
        match c.kind {
            ModelKind::Gaussian => {
                let cov = Mat::from_rows(c.cov.as_ref().expect("resolved")).map_err(with_field("cov"))?;
                Ok(MomentModel::Gaussian(
                    GaussianModel::new(cov).map_err(with_field("cov"))?,
                ))
            }
            ModelKind::IndependentComponents => Ok(MomentModel::Independent(
                IndependentModel::new(c.coordinate_laws.clone().expect("resolved"))
                    .map_err(with_field("coordinate_laws"))?,
            )),
            _ => {
                let star = c.star_set.clone().expect("resolved");
                match c.mode.expect("resolved") {
                    Example8Mode::ExactLog => Ok(MomentModel::Example8(Example8Model::exact(star))),
                    Example8Mode::Scaled => Ok(MomentModel::Example8(Example8Model::scaled(
                        star,
                        c.kappa.expect("resolved"),
                        c.k_max.expect("resolved"),
                    )?)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_trace_identity() {
        let m = ModelConfig {
            kind: ModelKind::IndependentComponents,
            cov: None,
            coordinate_laws: Some(vec![
                CoordinateLaw::Normal { sigma: 1.0 },
                CoordinateLaw::Uniform { half_width: 2.0 },
            ]),
            star_set: None,
            mode: None,
            kappa: None,
            k_max: None,
        }
        .build()
        .unwrap();
        for t in [0.3, 1.0, 5.0] {
            let c = m.trunc_cov(t);
            let s: f64 = (0..2).map(|i| m.coord_trunc_var(i, t)).sum();
            assert!((c.trace() - s).abs() < 1e-15);
        }
    }

    #[test]
    fn config_rejects_unknown_and_stray_fields() {
        let bad = r#"{"kind":"gaussian","cov":[[1]],"sigma":2}"#;
        assert!(serde_json::from_str::<ModelConfig>(bad).is_err());
        let stray: ModelConfig =
            serde_json::from_str(r#"{"kind":"gaussian","cov":[[1]],"kappa":2}"#).unwrap();
        assert!(matches!(stray.build(), Err(Error::Input(_))));
    }

    #[test]
    fn example8_defaults_are_spelled_out() {
        let c: ModelConfig = serde_json::from_str(
            r#"{"kind":"example8_scaled","star_set":{"segments":[{"sigma":1,"z":[1,0]}]}}"#,
        )
        .unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.mode, Some(Example8Mode::Scaled));
        assert_eq!(r.kappa, Some(DEFAULT_KAPPA));
        assert_eq!(r.k_max, Some(DEFAULT_K_MAX));
        let m = c.build().unwrap();
        assert_eq!(m.kind(), "example8_scaled");
        assert!(m.has_sampler());
    }

    #[test]
    fn trunc_cov_is_monotone() {
        let g = MomentModel::Gaussian(
            GaussianModel::new(Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap()).unwrap(),
        );
        let mut prev = Mat::zeros(2);
        for t in [0.2, 0.7, 1.5, 3.0, 20.0] {
            let c = g.trunc_cov(t);
            let (v, _) = symmetric_eigen(&c.sub(&prev)).unwrap();
            assert!(v.iter().all(|x| *x >= -1e-10));
            prev = c;
        }
    }
}
