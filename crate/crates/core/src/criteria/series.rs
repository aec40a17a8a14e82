//! Three-valued divergence classification of `Σ n⁻¹ exp(−e_n)`.
//!
//! Work in `x = ln ln n`, where `n⁻¹ dn = eˣ dx`. A block covering `dx`
//! with mass `M` has local exponent `s = 1 − (ln M − ln dx)/x`; the
//! reference family `e_n = s·ln ln n` has constant `s`, with divergence
//! exactly for `s ≤ 1`. The tail of the block list is cut into windows; each
//! window reports its smallest `s`. The classifier looks at the last window
//! and at the growth exponent `γ` of `s` against `x` across windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lognum::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    Divergent,
    Convergent,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Ratio of the geometric grid `n_k = ρ^k`.
    pub rho: f64,
    /// Number of grid blocks `K`.
    pub blocks: usize,
    /// Undecided half-band around `s = 1`.
    pub margin: f64,
    /// Tail windows.
    pub windows: usize,
    /// `|γ|` above which the trend decides.
    pub gamma_threshold: f64,
    /// Ladder depth for the block-model frame.
    pub k_max: u32,
    pub epsilons: Vec<f64>,
    pub alpha_hi: f64,
    pub alpha_tol: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            rho: 1.5,
            blocks: 200,
            margin: 0.1,
            windows: 8,
            gamma_threshold: 0.25,
            k_max: 3,
            epsilons: vec![0.5, 0.2, 0.1, 0.05, 0.02],
            alpha_hi: 10.0,
            alpha_tol: 0.05,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Parameter(format!("classifier: {m}")));
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return bad("rho must be > 1");
        }
        if self.blocks < 16 {
            return bad("blocks must be ≥ 16");
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return bad("margin must lie in (0, 1)");
        }
        if self.windows < 2 {
            return bad("windows must be ≥ 2");
        }
        if !(self.gamma_threshold > 0.0) {
            return bad("gamma_threshold must be positive");
        }
        if self.k_max == 0 {
            return bad("k_max must be ≥ 1");
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("epsilons must be positive and nonempty");
        }
        if !(self.alpha_hi > 0.0) || !(self.alpha_tol > 0.0) {
            return bad("alpha_hi and alpha_tol must be positive");
        }
        Ok(())
    }
}

/// One block of the series: position `x`, `ln dx` and `ln` of its mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBlock {
    pub x: f64,
    pub ln_dx: f64,
    /// `None` when the block is outside the index set.
    pub ln_mass: Option<f64>,
}

impl SeriesBlock {
    pub fn s(&self) -> Option<f64> {
        let m = self.ln_mass?;
        if m == f64::NEG_INFINITY {
            return None;
        }
        Some(1.0 - (m - self.ln_dx) / self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStat {
    /// `x` of the block attaining the smallest `s`.
    pub x: f64,
    pub s: Option<f64>,
    /// `ln` of the summed block masses.
    pub ln_mass: Option<f64>,
    pub included: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub class: SeriesClass,
    /// Classification with zero margin.
    pub lean: SeriesClass,
    /// Classifications at `s ∓ margin` when undecided.
    pub neighbors: Option<(SeriesClass, SeriesClass)>,
    pub s_tail: Option<f64>,
    pub gamma: Option<f64>,
    pub margin: f64,
    pub rule: String,
    pub windows: Vec<WindowStat>,
}

fn by_s(s: f64) -> SeriesClass {
    if s < 1.0 {
        SeriesClass::Divergent
    } else {
        SeriesClass::Convergent
    }
}

/// Classifies blocks grouped into tail windows (given in increasing `x`).
pub fn classify_windows(windows: &[Vec<SeriesBlock>], cfg: &ClassifierConfig) -> SeriesVerdict {
    let stats: Vec<WindowStat> = windows
        .iter()
        .map(|w| {
            let mut best: Option<(f64, f64)> = None;
            let mut masses = Vec::new();
            for b in w {
                if let Some(s) = b.s() {
                    masses.push(b.ln_mass.expect("has s"));
                    if best.is_none_or(|(bs, _)| s < bs) {
                        best = Some((s, b.x));
                    }
                }
            }
            WindowStat {
                x: best.map(|b| b.1).or_else(|| w.last().map(|b| b.x)).unwrap_or(f64::NAN),
                s: best.map(|b| b.0),
                ln_mass: (!masses.is_empty()).then(|| log_sum_exp(masses)),
                included: w.iter().filter(|b| b.s().is_some()).count(),
                total: w.len(),
            }
        })
        .collect();
    let margin = cfg.margin;
    let done = |class, lean, rule: &str, s_tail, gamma, neighbors| SeriesVerdict {
        class,
        lean,
        neighbors,
        s_tail,
        gamma,
        margin,
        rule: rule.into(),
        windows: stats.clone(),
    };
    let Some(last) = stats.last() else {
        return done(SeriesClass::Convergent, SeriesClass::Convergent, "no_blocks", None, None, None);
    };
    let Some(s) = last.s else {
        return done(
            SeriesClass::Convergent,
            SeriesClass::Convergent,
            "tail_excluded",
            None,
            None,
            None,
        );
    };
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter_map(|w| w.s.filter(|s| *s > 0.0).map(|s| (w.x.ln(), s.ln())))
        .collect();
    let gamma = (pts.len() >= 2).then(|| slope(&pts));
    if s <= 0.0 {
        return done(SeriesClass::Divergent, SeriesClass::Divergent, "tail_exponent_nonpositive", Some(s), gamma, None);
    }
    if let Some(g) = gamma {
        if g > cfg.gamma_threshold {
            return done(SeriesClass::Convergent, SeriesClass::Convergent, "growth_exponent", Some(s), gamma, None);
        }
        if g < -cfg.gamma_threshold {
            return done(SeriesClass::Divergent, SeriesClass::Divergent, "decay_exponent", Some(s), gamma, None);
        }
    }
    if s <= 1.0 - margin {
        done(SeriesClass::Divergent, SeriesClass::Divergent, "tail_exponent", Some(s), gamma, None)
    } else if s >= 1.0 + margin {
        done(SeriesClass::Convergent, SeriesClass::Convergent, "tail_exponent", Some(s), gamma, None)
    } else {
        done(
            SeriesClass::Undecided,
            by_s(s),
            "margin_band",
            Some(s),
            gamma,
            Some((by_s(s - margin), by_s(s + margin))),
        )
    }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx
}

/// Splits the last half of `blocks` into `windows` consecutive groups.
pub fn tail_windows<T: Clone>(blocks: &[T], windows: usize) -> Vec<Vec<T>> {
    let tail = &blocks[blocks.len() / 2..];
    let w = windows.min(tail.len()).max(1);
    (0..w)
        .map(|i| tail[i * tail.len() / w..(i + 1) * tail.len() / w].to_vec())
        .collect()
}

/// Classifies `Σ n⁻¹ exp(−e_n)` from exponents given as functions of
/// `ln n`, on the grid `n_k = ρ^k`. `None` drops the index from the sum.
pub fn series_classify(
    exponent: impl Fn(f64) -> Option<f64>,
    cfg: &ClassifierConfig,
) -> Result<SeriesVerdict> {
    cfg.validate()?;
    let lr = cfg.rho.ln();
    let mut blocks = Vec::with_capacity(cfg.blocks);
    for k in 1..=cfg.blocks {
        let ln_n = k as f64 * lr;
        let e = exponent(ln_n);
        if let Some(v) = e {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Input(format!(
                    "exponent at ln n = {ln_n} must be finite and ≥ 0, got {v}"
                )));
            }
        }
        blocks.push(SeriesBlock {
            x: ln_n.ln(),
            ln_dx: lr.ln() - ln_n.ln(),
            ln_mass: e.map(|v| lr.ln() - v),
        });
    }
    Ok(classify_windows(&tail_windows(&blocks, cfg.windows), cfg))
}

/// `ln ∫_lo^hi exp(u − c·u^q) du` for `q ≥ 1`, `c ≥ 0`, `lo ≥ 1`.
///
/// The integrand is log-concave; the integral is taken over the super-level
/// set within 60 nats of the maximum, in offsets from the argmax so that
/// huge `u` keep full relative precision.
pub fn ln_span_integral(lo: f64, hi: f64, c: f64, q: f64) -> f64 {
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    let x_star = if c == 0.0 {
        hi
    } else if q == 1.0 {
        if c <= 1.0 {
            hi
        } else {
            lo
        }
    } else {
        // 1 = c q u^{q−1}
        let u = (-(c * q).ln() / (q - 1.0)).exp();
        u.clamp(lo, hi)
    };
    let cx = c * x_star.powf(q);
    let f_star = x_star - cx;
    let g = |d: f64| -> f64 {
        if c == 0.0 {
            d
        } else {
            d - cx * (q * (d / x_star).ln_1p()).exp_m1()
        }
    };
    const CUT: f64 = -60.0;
    let edge = |end: f64| -> f64 {
        if g(end) >= CUT {
            return end;
        }
        let (mut inside, mut outside) = (0.0, end);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if g(mid) >= CUT {
                inside = mid;
            } else {
                outside = mid;
            }
            if (outside - inside).abs() <= 1e-12 * outside.abs().max(1.0) {
                break;
            }
        }
        outside
    };
    let a = edge(lo - x_star);
    let b = edge(hi - x_star);
    let h = |d: f64| g(d).exp();
    let total = adaptive_simpson(&h, a, b, 1e-12, 60);
    f_star + total.ln()
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol * whole.abs().max(1e-300), depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(s: f64) -> SeriesClass {
        series_classify(|ln_n| Some(s * ln_n.max(std::f64::consts::E).ln()), &ClassifierConfig::default())
            .unwrap()
            .class
    }

    #[test]
    fn calibration_family() {
        assert_eq!(reference(0.5), SeriesClass::Divergent);
        assert_eq!(reference(0.8), SeriesClass::Divergent);
        assert_eq!(reference(1.3), SeriesClass::Convergent);
        assert_eq!(reference(2.0), SeriesClass::Convergent);
        assert_eq!(reference(0.95), SeriesClass::Undecided);
        assert_eq!(reference(0.0), SeriesClass::Divergent);
    }

    #[test]
    fn undecided_reports_neighbors() {
        let v = series_classify(|l| Some(0.97 * l.max(std::f64::consts::E).ln()), &ClassifierConfig::default()).unwrap();
        assert_eq!(v.neighbors, Some((SeriesClass::Divergent, SeriesClass::Convergent)));
        assert_eq!(v.lean, SeriesClass::Divergent);
    }

    #[test]
    fn growing_exponent_converges() {
        // Σ n⁻¹ (ln n)^{−0.01 ln ln n} converges
        let v = series_classify(|l| Some(0.01 * l.max(std::f64::consts::E).ln().powi(2)), &ClassifierConfig::default()).unwrap();
        assert_eq!(v.class, SeriesClass::Convergent);
        assert_eq!(v.rule, "growth_exponent");
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(series_classify(|_| Some(f64::NAN), &ClassifierConfig::default()).is_err());
        assert!(series_classify(|_| Some(f64::INFINITY), &ClassifierConfig::default()).is_err());
        let v = series_classify(|_| None, &ClassifierConfig::default()).unwrap();
        assert_eq!(v.class, SeriesClass::Convergent);
    }

    #[test]
    fn span_integral_matches_closed_forms() {
        // c = 0: ∫ e^u du
        let v = ln_span_integral(2.0, 5.0, 0.0, 2.0);
        assert!((v - (5f64.exp() - 2f64.exp()).ln()).abs() < 1e-10);
        // q = 1: ∫ e^{(1−c)u} du
        let v = ln_span_integral(1.0, 3.0, 0.5, 1.0);
        let want = ((0.5f64 * 3.0).exp() - 0.5f64.exp()) / 0.5;
        assert!((v - want.ln()).abs() < 1e-10);
        // q = 2 compared with erf-free Simpson on a fine grid
        let (lo, hi, c) = (1.0, 4.0, 0.3);
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        let s: f64 = (0..=n)
            .map(|i| {
                let u = lo + i as f64 * h;
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * (u - c * u * u).exp()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((ln_span_integral(lo, hi, c, 2.0) - s.ln()).abs() < 1e-9);
    }

    #[test]
    fn span_integral_at_huge_scale() {
        // u − u²/D over [D, 2D]: maximum D·0 at u = D, slope −1 there
        let d = 1e12;
        let v = ln_span_integral(d, 2.0 * d, 1.0 / d, 2.0);
        assert!(v.abs() < 1e-6, "{v}");
    }
}
