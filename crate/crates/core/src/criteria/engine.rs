//! Block frames for the exponential series and the query engine.
//!
//! A frame fixes where the series is sampled and what the truncated
//! covariance is on each block. The regular frame uses `n_k = ρ^k`. The
//! ladder frame follows the exact block model: `H(c_n)` is constant while
//! `⌊ln c_n⌋` sits on a plateau, so each plateau becomes one block whose
//! mass is an integral in `x = ln ln n`, and each ramp step is its own
//! block. Both frames are built once; queries only recompute exponents.

use rayon::prelude::*;

use crate::criteria::eigen::EigenSystem;
use crate::criteria::normalizer::NormalizerSeq;
use crate::criteria::series::{
    classify_windows, ln_span_integral, ClassifierConfig, SeriesBlock, SeriesVerdict,
};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::models::example8::{exact_anchor, ln_anchor, next_block, Example8Mode};
use crate::models::{MomentModel, Pos};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Mass density `e^{x − C φ}` over `dx`, `φ = c_n²/2n`.
    Point { ln_phi: f64 },
    /// `∫_x^{x_hi} e^{u − C u^q} du`.
    Span { x_hi: f64, q: f64 },
    /// Density `e^{x − C x^q}` over `dx`.
    Step { q: f64 },
}

#[derive(Debug, Clone)]
pub struct FrameBlock {
    pub x: f64,
    pub ln_dx: f64,
    pub shape: Shape,
    pub eig: EigenSystem,
    pub coord_var: Vec<f64>,
    pub window: Option<usize>,
    /// Index into the frame's basis cache.
    pub basis: usize,
}

impl FrameBlock {
    /// `ln` mass for exponent coefficient `c`, i.e. exponent `c·φ`.
    pub fn ln_mass(&self, c: f64) -> f64 {
        match self.shape {
            Shape::Point { ln_phi } => {
                let e = if c == 0.0 { 0.0 } else { c * ln_phi.exp() };
                self.ln_dx + self.x - e
            }
            Shape::Step { q } => {
                let e = if c == 0.0 { 0.0 } else { c * self.x.powf(q) };
                self.ln_dx + self.x - e
            }
            Shape::Span { x_hi, q } => ln_span_integral(self.x, x_hi, c, q),
        }
    }

    pub fn h(&self) -> f64 {
        self.eig.lambda_max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Regular,
    Ladder,
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub kind: FrameKind,
    pub blocks: Vec<FrameBlock>,
    pub windows: usize,
    pub bases: Vec<EigenSystem>,
}

impl Frame {
    pub fn regular(model: &MomentModel, seq: &NormalizerSeq, cfg: &ClassifierConfig) -> Result<Frame> {
        let lr = cfg.rho.ln();
        let k_tail = cfg.blocks / 2 + 1;
        let tail_len = cfg.blocks - k_tail + 1;
        let w = cfg.windows.min(tail_len);
        let raw: Vec<(f64, Mat, Vec<f64>)> = (1..=cfg.blocks)
            .into_par_iter()
            .map(|k| {
                let ln_n = k as f64 * lr;
                let ln_c = seq.ln_c(ln_n);
                let cov = model.trunc_cov_ln(ln_c);
                let cv = (0..model.dim()).map(|i| model.coord_trunc_var_ln(i, ln_c)).collect();
                (ln_n, cov, cv)
            })
            .collect();
        let mut bases = Vec::new();
        let mut blocks = Vec::with_capacity(raw.len());
        for (idx, (ln_n, cov, cv)) in raw.into_iter().enumerate() {
            let k = idx + 1;
            let eig = EigenSystem::from_cov(&cov)?;
            let basis = eig.basis_slot(&mut bases);
            let window = (k >= k_tail).then(|| (k - k_tail) * w / tail_len);
            blocks.push(FrameBlock {
                x: ln_n.ln(),
                ln_dx: lr.ln() - ln_n.ln(),
                shape: Shape::Point {
                    ln_phi: seq.ln_phi(ln_n),
                },
                eig,
                coord_var: cv,
                window,
                basis,
            });
        }
        Ok(Frame {
            kind: FrameKind::Regular,
            blocks,
            windows: w,
            bases,
        })
    }

    /// Ladder frame for the exact block model and `c_n = √(2n) LL^p`.
    pub fn ladder(model: &MomentModel, p: f64, k_max: u32) -> Result<Frame> {
        let Some(m8) = model.example8() else {
            return Err(Error::Capability("ladder frame needs the block model".into()));
        };
        if p < 0.5 {
            return Err(Error::Capability(format!(
                "ladder frame needs a normalizer power p ≥ 1/2, got {p}"
            )));
        }
        let q = 2.0 * p;
        let x_of = |ln_w: f64| x_of_ln_w(ln_w, p);
        let k_tail = k_max.div_ceil(2).max(1);
        let mut bases = Vec::new();
        let mut blocks = Vec::new();
        let mut push = |pos: Pos, x: f64, ln_dx: f64, shape: Shape, k: u32| -> Result<()> {
            let cov = m8.trunc_cov_pos(&pos);
            let eig = EigenSystem::from_cov(&cov)?;
            let basis = eig.basis_slot(&mut bases);
            blocks.push(FrameBlock {
                x,
                ln_dx,
                shape,
                coord_var: (0..cov.dim()).map(|i| cov[(i, i)]).collect(),
                eig,
                window: (k >= k_tail).then(|| (k - k_tail) as usize),
                basis,
            });
            Ok(())
        };
        for k in 1..=k_max {
            let k3 = (k as i64).pow(3);
            for l in 0..=k {
                let (nk, nl) = next_block(k, l);
                let lo = x_of(ln_anchor_exact(k, l));
                let hi = x_of(ln_shifted(nk, nl, 1 - k3));
                push(Pos::anchor(k, l), lo, (hi - lo).ln(), Shape::Span { x_hi: hi, q }, k)?;
                for j in 1..k3 {
                    let x = x_of(ln_shifted(nk, nl, j - k3));
                    let ln_dx = std::f64::consts::LN_2 - x - (q * (-x).exp() / x).ln_1p();
                    push(Pos::Ramp { k, l, j }, x, ln_dx, Shape::Step { q }, k)?;
                }
            }
        }
        Ok(Frame {
            kind: FrameKind::Ladder,
            blocks,
            windows: (k_max - k_tail + 1) as usize,
            bases,
        })
    }

    /// Classifies the series whose exponent on each block is `coef(block)·φ`.
    pub fn classify(
        &self,
        coef: impl Fn(&FrameBlock) -> Option<f64>,
        cfg: &ClassifierConfig,
    ) -> SeriesVerdict {
        let mut windows: Vec<Vec<SeriesBlock>> = vec![Vec::new(); self.windows];
        for b in &self.blocks {
            let Some(w) = b.window else { continue };
            windows[w].push(SeriesBlock {
                x: b.x,
                ln_dx: b.ln_dx,
                ln_mass: coef(b).map(|c| b.ln_mass(c)),
            });
        }
        classify_windows(&windows, cfg)
    }
}

fn ln_anchor_exact(k: u32, l: u32) -> f64 {
    match exact_anchor(k, l) {
        Some(m) => (m as f64).ln(),
        None => ln_anchor(k, l),
    }
}

/// `ln(m_{k,ℓ} + off)`.
fn ln_shifted(k: u32, l: u32, off: i64) -> f64 {
    match exact_anchor(k, l) {
        Some(m) => (m as f64 + off as f64).ln(),
        None => {
            let lm = ln_anchor(k, l);
            lm + (off as f64 * (-lm).exp()).ln_1p()
        }
    }
}

/// `x = ln ln n` where `ln c_n = w`, i.e. `eˣ = 2w − ln 2 − 2p ln x`.
pub fn x_of_ln_w(ln_w: f64, p: f64) -> f64 {
    if ln_w > 40.0 {
        return std::f64::consts::LN_2 + ln_w;
    }
    let w = ln_w.exp();
    let mut x = (2.0 * w).ln();
    for _ in 0..100 {
        let next = (2.0 * w - std::f64::consts::LN_2 - 2.0 * p * x.max(1.0).ln()).ln();
        if (next - x).abs() < 1e-15 {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Query engine: a model, a normalizer, a classifier configuration and the
/// frame built from them.
#[derive(Debug, Clone)]
pub struct Criteria {
    pub model: MomentModel,
    pub seq: NormalizerSeq,
    pub cfg: ClassifierConfig,
    pub frame: Frame,
}

impl Criteria {
    pub fn new(model: MomentModel, seq: NormalizerSeq, cfg: ClassifierConfig) -> Result<Self> {
        cfg.validate()?;
        seq.validate()?;
        let exact = model
            .example8()
            .is_some_and(|m| m.mode() == Example8Mode::ExactLog);
        let frame = match (exact, seq.loglog_power()) {
            (true, Some(p)) if p >= 0.5 => Frame::ladder(&model, p, cfg.k_max)?,
            _ => Frame::regular(&model, &seq, &cfg)?,
        };
        Ok(Criteria {
            model,
            seq,
            cfg,
            frame,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Example8Model, StarSet};

    #[test]
    fn x_mapping_inverts_normalizer() {
        let seq = NormalizerSeq::Sqrt2nLoglogPow { p: 1.0 };
        for ln_n in [20.0, 300.0, 5000.0] {
            let w = seq.ln_c(ln_n);
            let x = x_of_ln_w(w.ln(), 1.0);
            assert!((x - ln_n.ln()).abs() < 1e-9, "{x} vs {}", ln_n.ln());
        }
    }

    #[test]
    fn ladder_frame_shape() {
        let m = MomentModel::Example8(Example8Model::exact(StarSet::single(vec![1.0]).unwrap()));
        let f = Frame::ladder(&m, 1.0, 3).unwrap();
        // plateaus 2 + 3 + 4, ramps 3·7 + 4·26
        assert_eq!(f.blocks.len(), 9 + 21 + 104);
        assert_eq!(f.windows, 2);
        assert!(f.blocks.windows(2).all(|w| w[1].x >= w[0].x));
        assert!(f.bases.len() <= 2);
    }
}
