//! Vectors with independent coordinates drawn from simple symmetric laws.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::models::chisq::gen_chisq_cdf;
use crate::models::gaussian::normal_trunc_var;
use crate::sim::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoordinateLaw {
    Normal { sigma: f64 },
    /// `±scale` with probability 1/2 each.
    Rademacher { scale: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    Zero,
}

impl CoordinateLaw {
    fn validate(&self) -> Result<()> {
        let v = match self {
            CoordinateLaw::Normal { sigma } => *sigma,
            CoordinateLaw::Rademacher { scale } => *scale,
            CoordinateLaw::Uniform { half_width } => *half_width,
            CoordinateLaw::Zero => 0.0,
        };
        if !(v >= 0.0) || !v.is_finite() {
            return param(format!("coordinate law parameter must be finite and ≥ 0: {self:?}"));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match self {
            CoordinateLaw::Normal { sigma } => sigma * sigma,
            CoordinateLaw::Rademacher { scale } => scale * scale,
            CoordinateLaw::Uniform { half_width } => half_width * half_width / 3.0,
            CoordinateLaw::Zero => 0.0,
        }
    }

    /// `E[Y² 1{|Y| ≤ t}]`.
    pub fn trunc_var(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            CoordinateLaw::Normal { sigma } => normal_trunc_var(*sigma, t),
            CoordinateLaw::Rademacher { scale } => {
                if *scale <= t {
                    scale * scale
                } else {
                    0.0
                }
            }
            CoordinateLaw::Uniform { half_width } => {
                if *half_width == 0.0 {
                    0.0
                } else {
                    t.min(*half_width).powi(3) / (3.0 * half_width)
                }
            }
            CoordinateLaw::Zero => 0.0,
        }
    }

    fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            CoordinateLaw::Normal { sigma } => sigma * rng.normal(),
            CoordinateLaw::Rademacher { scale } => scale * rng.rademacher(),
            CoordinateLaw::Uniform { half_width } => half_width * rng.symmetric_uniform(),
            CoordinateLaw::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndependentModel {
    laws: Vec<CoordinateLaw>,
}

impl IndependentModel {
    pub fn new(laws: Vec<CoordinateLaw>) -> Result<Self> {
        if laws.is_empty() {
            return param("at least one coordinate law is required");
        }
        for l in &laws {
            l.validate()?;
        }
        Ok(IndependentModel { laws })
    }

    pub fn dim(&self) -> usize {
        self.laws.len()
    }

    pub fn laws(&self) -> &[CoordinateLaw] {
        &self.laws
    }

    pub fn coord_trunc_var(&self, i: usize, t: f64) -> f64 {
        self.laws[i].trunc_var(t)
    }

    /// `P(|X| > t)`; available when every coordinate is normal or zero.
    pub fn tail(&self, t: f64) -> Result<f64> {
        let mut terms = Vec::new();
        for l in &self.laws {
            match l {
                CoordinateLaw::Normal { sigma } => terms.push((sigma * sigma, 1.0)),
                CoordinateLaw::Zero => {}
                other => {
                    return Err(Error::Capability(format!(
                        "tail probabilities need normal coordinates, found {other:?}"
                    )))
                }
            }
        }
        Ok(1.0 - gen_chisq_cdf(&terms, t * t))
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        self.laws.iter().map(|l| l.sample(rng)).collect()
    }
}
