//! Run configuration: one JSON document with the sections `model`,
//! `normalizer`, `classifier`, `queries` and `simulation`.

use serde::{Deserialize, Serialize};

use crate::criteria::{ClassifierConfig, NormalizerSeq};
use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::models::{ModelConfig, ModelKind};
use crate::sim::SimulationConfig;
use crate::strassen::k_sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Defaults to `√(2n) LL` for the block model and `√(2n LL)` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<NormalizerSeq>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub queries: Vec<Query>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub seed: u64,
}

/// A request for the criteria engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Query {
    Point {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        x: Vec<f64>,
    },
    Function {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        f: GridFn,
    },
    /// `f = (x_1 g_1, …, x_d g_d)` with `g_i` taken from the fixed
    /// eight-element sample of `𝒦` by index.
    Product {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        x: Vec<f64>,
        k_sample: Vec<usize>,
        #[serde(default = "default_grid")]
        n_grid: usize,
    },
    Alpha0 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    CoordinateAlphas {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    PredictedSets {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
}

fn default_grid() -> usize {
    64
}

impl Query {
    pub fn type_name(&self) -> &'static str {
        match self {
            Query::Point { .. } => "point",
            Query::Function { .. } => "function",
            Query::Product { .. } => "product",
            Query::Alpha0 { .. } => "alpha0",
            Query::CoordinateAlphas { .. } => "coordinate_alphas",
            Query::PredictedSets { .. } => "predicted_sets",
        }
    }

    /// The given id, or `q<index>`.
    pub fn label(&self, index: usize) -> String {
        let id = match self {
            Query::Point { id, .. }
            | Query::Function { id, .. }
            | Query::Product { id, .. }
            | Query::Alpha0 { id }
            | Query::CoordinateAlphas { id }
            | Query::PredictedSets { id } => id,
        };
        id.clone().unwrap_or_else(|| format!("q{index}"))
    }

    /// The grid function of a `function` or `product` query.
    pub fn function(&self) -> Result<Option<GridFn>> {
        match self {
            Query::Function { f, .. } => Ok(Some(f.clone())),
            Query::Product {
                x, k_sample: idx, n_grid, ..
            } => {
                if x.len() != idx.len() {
                    return Err(Error::Input(format!(
                        "product query: x has {} entries but k_sample has {}",
                        x.len(),
                        idx.len()
                    )));
                }
                let ks = k_sample(*n_grid)?;
                let coords = x
                    .iter()
                    .zip(idx)
                    .map(|(xi, i)| {
                        ks.get(*i)
                            .map(|g| g.scaled(*xi))
                            .ok_or_else(|| Error::Input(format!("k_sample index {i} outside 0..{}", ks.len())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some(GridFn::from_coordinates(&coords)?))
            }
            _ => Ok(None),
        }
    }
}

impl RunConfig {
    /// Parses a config document; errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            Error::Input(format!("config line {} column {}: {msg}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &'static str| move |e: Error| Error::Input(format!("{name}: {e}"));
        self.model.resolved()?;
        self.normalizer().validate().map_err(field("normalizer"))?;
        self.classifier.validate().map_err(field("classifier"))?;
        self.simulation.validate().map_err(field("simulation"))?;
        for (i, q) in self.queries.iter().enumerate() {
            q.function().map_err(|e| Error::Input(format!("queries[{i}]: {e}")))?;
        }
        Ok(())
    }

    pub fn normalizer(&self) -> NormalizerSeq {
        match (&self.normalizer, self.model.kind) {
            (Some(n), _) => n.clone(),
            (None, ModelKind::Example8 | ModelKind::Example8Exact | ModelKind::Example8Scaled) => {
                NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 }
            }
            (None, _) => NormalizerSeq::Sqrt2nLoglog,
        }
    }

    /// The same document with every default written out.
    pub fn resolved(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            model: self.model.resolved()?,
            normalizer: Some(self.normalizer()),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = r#"{
        "model": {"kind": "gaussian", "cov": [[1, 0], [0, 1]]},
        "queries": [
            {"type": "point", "x": [0.3, 0.4]},
            {"type": "product", "x": [0.6, 0.48], "k_sample": [0, 3], "n_grid": 32},
            {"type": "alpha0", "id": "a"}
        ]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::parse(DISK).unwrap();
        assert_eq!(c.normalizer(), NormalizerSeq::Sqrt2nLoglog);
        assert_eq!(c.classifier, ClassifierConfig::default());
        assert_eq!(c.queries.len(), 3);
        assert_eq!(c.queries[2].label(2), "a");
        assert_eq!(c.queries[0].label(0), "q0");
        let f = c.queries[1].function().unwrap().unwrap();
        assert_eq!((f.dim(), f.n_grid()), (2, 32));
    }

    #[test]
    fn diagnostics_name_the_location() {
        let e = RunConfig::parse("{\n  \"model\": {\"kind\": \"gaussian\", \"cov\": [[1]]},\n  \"querys\": []\n}")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(e.contains("querys"), "{e}");
        let e = RunConfig::parse(r#"{"model": {"kind": "gaussian"}}"#).unwrap_err().to_string();
        assert!(e.contains("model.cov"), "{e}");
    }

    #[test]
    fn resolved_round_trips() {
        let c = RunConfig::parse(DISK).unwrap().resolved().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}
