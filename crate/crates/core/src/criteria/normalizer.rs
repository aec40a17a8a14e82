//! Normalizing sequences `c_n` and numerical regularity checks.
//!
//! Everything is evaluated through `ln n` so that indices far beyond the
//! float range stay usable.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// `c_n` families. `LL(n) = ln ln n`, floored at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormalizerSeq {
    /// `√(2n LL(n))`.
    Sqrt2nLoglog,
    /// `√(2n) LL(n)^p`.
    Sqrt2nLoglogPow { p: f64 },
    /// `scale · n^exponent`.
    Power { exponent: f64, scale: f64 },
    /// Log-log linear interpolation through `(n, c)` pairs, extrapolated
    /// with the end slopes.
    Tabulated { n: Vec<f64>, c: Vec<f64> },
}

/// `LL` as a function of `ln n`.
pub fn loglog(ln_n: f64) -> f64 {
    ln_n.max(std::f64::consts::E).ln()
}

impl NormalizerSeq {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormalizerSeq::Sqrt2nLoglog => Ok(()),
            NormalizerSeq::Sqrt2nLoglogPow { p } => {
                if !(*p >= 0.0) || !p.is_finite() {
                    return param(format!("normalizer power p must be ≥ 0, got {p}"));
                }
                Ok(())
            }
            NormalizerSeq::Power { exponent, scale } => {
                if !(*scale > 0.0) || !exponent.is_finite() || !scale.is_finite() {
                    return param("power normalizer needs finite exponent and scale > 0");
                }
                Ok(())
            }
            NormalizerSeq::Tabulated { n, c } => {
                if n.len() < 2 || n.len() != c.len() {
                    return param("tabulated normalizer needs ≥ 2 matching (n, c) pairs");
                }
                if n.windows(2).any(|w| !(w[1] > w[0])) || n[0] < 1.0 {
                    return param("tabulated n values must be ≥ 1 and strictly increasing");
                }
                if c.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return param("tabulated c values must be positive and finite");
                }
                Ok(())
            }
        }
    }

    /// The exponent `p` of the `√(2n) LL^p` families.
    pub fn loglog_power(&self) -> Option<f64> {
        match self {
            NormalizerSeq::Sqrt2nLoglog => Some(0.5),
            NormalizerSeq::Sqrt2nLoglogPow { p } => Some(*p),
            _ => None,
        }
    }

    pub fn ln_c(&self, ln_n: f64) -> f64 {
        match self {
            NormalizerSeq::Sqrt2nLoglog | NormalizerSeq::Sqrt2nLoglogPow { .. } => {
                let p = self.loglog_power().expect("pow family");
                0.5 * (std::f64::consts::LN_2 + ln_n) + p * loglog(ln_n).ln()
            }
            NormalizerSeq::Power { exponent, scale } => scale.ln() + exponent * ln_n,
            NormalizerSeq::Tabulated { n, c } => {
                let xs: Vec<f64> = n.iter().map(|v| v.ln()).collect();
                let ys: Vec<f64> = c.iter().map(|v| v.ln()).collect();
                let i = match xs.iter().position(|x| *x > ln_n) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => xs.len() - 2,
                };
                let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                ys[i] + slope * (ln_n - xs[i])
            }
        }
    }

    pub fn c(&self, n: f64) -> f64 {
        self.ln_c(n.ln()).exp()
    }

    /// `ln(c_n² / 2n)`.
    pub fn ln_phi(&self, ln_n: f64) -> f64 {
        2.0 * self.ln_c(ln_n) - std::f64::consts::LN_2 - ln_n
    }

    pub fn label(&self) -> String {
        match self {
            NormalizerSeq::Sqrt2nLoglog => "sqrt(2n loglog n)".into(),
            NormalizerSeq::Sqrt2nLoglogPow { p } => format!("sqrt(2n) (loglog n)^{p}"),
            NormalizerSeq::Power { exponent, scale } => format!("{scale} n^{exponent}"),
            NormalizerSeq::Tabulated { n, .. } => format!("tabulated ({} points)", n.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cn1Check {
    pub pass: bool,
    /// First `(m, n)` with `c_n/√n < c_m/√m`, or the range ends when the
    /// ratio does not grow at all.
    pub offending: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cn2Check {
    pub epsilon: f64,
    pub pass: bool,
    /// Smallest grid point `m_ε` from which `c_n/c_m ≤ (1+ε) n/m` holds.
    pub m_eps: Option<f64>,
    /// Last violating `(m, n)` pair.
    pub offending: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerReport {
    pub n_min: f64,
    pub n_max: f64,
    pub cn1: Cn1Check,
    pub cn2: Vec<Cn2Check>,
    pub pass: bool,
}

pub const CN2_EPSILONS: [f64; 3] = [0.5, 0.1, 0.01];
const GRID_POINTS: usize = 400;

/// Checks monotone growth of `c_n/√n` and the ratio bound on a geometric
/// grid over `[n_min, n_max]`. A ratio bound passes when `m_ε` is at most
/// the geometric midpoint of the range.
pub fn validate_normalizer(seq: &NormalizerSeq, n_min: f64, n_max: f64) -> Result<NormalizerReport> {
    seq.validate()?;
    if !(n_min >= 1.0 && n_max > n_min) {
        return param(format!("need 1 ≤ n_min < n_max, got [{n_min}, {n_max}]"));
    }
    let (a, b) = (n_min.ln(), n_max.ln());
    let ln_ns: Vec<f64> = (0..GRID_POINTS)
        .map(|i| a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let ratio: Vec<f64> = ln_ns.iter().map(|l| seq.ln_c(*l) - 0.5 * l).collect();
    let mut cn1 = Cn1Check {
        pass: true,
        offending: None,
    };
    for i in 1..ratio.len() {
        if ratio[i] < ratio[i - 1] - 1e-12 * ratio[i - 1].abs().max(1.0) {
            cn1 = Cn1Check {
                pass: false,
                offending: Some((ln_ns[i - 1].exp(), ln_ns[i].exp())),
            };
            break;
        }
    }
    if cn1.pass && ratio[ratio.len() - 1] - ratio[0] <= 1e-9 {
        cn1 = Cn1Check {
            pass: false,
            offending: Some((n_min, n_max)),
        };
    }

    // c_n/c_m ≤ (1+ε) n/m  ⇔  g(n) − g(m) ≤ ln(1+ε) with g = ln c − ln n
    let g: Vec<f64> = ln_ns.iter().map(|l| seq.ln_c(*l) - l).collect();
    let mut suffix_max = vec![f64::NEG_INFINITY; g.len() + 1];
    let mut suffix_arg = vec![usize::MAX; g.len() + 1];
    for i in (0..g.len()).rev() {
        if g[i] > suffix_max[i + 1] {
            suffix_max[i] = g[i];
            suffix_arg[i] = i;
        } else {
            suffix_max[i] = suffix_max[i + 1];
            suffix_arg[i] = suffix_arg[i + 1];
        }
    }
    let midpoint = (n_min * n_max).sqrt();
    let cn2 = CN2_EPSILONS
        .iter()
        .map(|&eps| {
            let bound = eps.ln_1p();
            let last_bad = (0..g.len() - 1)
                .rev()
                .find(|&i| suffix_max[i + 1] - g[i] > bound + 1e-12);
            let (m_eps, offending) = match last_bad {
                None => (Some(n_min), None),
                Some(i) => {
                    let pair = (ln_ns[i].exp(), ln_ns[suffix_arg[i + 1]].exp());
                    let m = (i + 1 < g.len() - 1).then(|| ln_ns[i + 1].exp());
                    (m, Some(pair))
                }
            };
            Cn2Check {
                epsilon: eps,
                pass: m_eps.is_some_and(|m| m <= midpoint * (1.0 + 1e-12)),
                m_eps,
                offending,
            }
        })
        .collect::<Vec<_>>();
    let pass = cn1.pass && cn2.iter().all(|c| c.pass);
    Ok(NormalizerReport {
        n_min,
        n_max,
        cn1,
        cn2,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_family_values() {
        let s = NormalizerSeq::Sqrt2nLoglog;
        let n: f64 = 1e6;
        let want = (2.0 * n * n.ln().ln()).sqrt();
        assert!((s.c(n) - want).abs() < 1e-9 * want);
        let p = NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 };
        let want = (2.0 * n).sqrt() * n.ln().ln();
        assert!((p.c(n) - want).abs() < 1e-9 * want);
        assert!((p.ln_phi(n.ln()) - 2.0 * n.ln().ln().ln()).abs() < 1e-12);
    }

    #[test]
    fn validation_cases() {
        let r = validate_normalizer(&NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 }, 10.0, 1e6).unwrap();
        assert!(r.pass, "{r:?}");
        let sqrt_n = NormalizerSeq::Power {
            exponent: 0.5,
            scale: 1.0,
        };
        let r = validate_normalizer(&sqrt_n, 10.0, 1e6).unwrap();
        assert!(!r.cn1.pass && !r.pass);
        let lin = NormalizerSeq::Power {
            exponent: 1.0,
            scale: 1.0,
        };
        assert!(validate_normalizer(&lin, 10.0, 1e6).unwrap().pass);
        let quad = NormalizerSeq::Power {
            exponent: 2.0,
            scale: 1.0,
        };
        let r = validate_normalizer(&quad, 10.0, 1e6).unwrap();
        assert!(r.cn1.pass && !r.pass && r.cn2[0].offending.is_some());
    }

    #[test]
    fn tabulated_interpolates_in_log_log() {
        let t = NormalizerSeq::Tabulated {
            n: vec![1.0, 100.0],
            c: vec![1.0, 10.0],
        };
        t.validate().unwrap();
        assert!((t.c(10.0) - 10f64.sqrt()).abs() < 1e-12);
        assert!((t.c(1e4) - 100.0).abs() < 1e-9);
    }
}
