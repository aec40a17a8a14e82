//! Heavy-tailed law built from a star-like set and a double-exponential
//! block ladder.
//!
//! The ladder has anchors `m_{k,ℓ} = 3^{2^{e(k,ℓ)}}` with `e(k,ℓ) = k³ + ℓk`
//! for `0 ≤ ℓ ≤ k` and the seam `m_{k,k+1} = m_{k+1}`. The truncated second
//! moment `H(t) = d_n` on `[e^n, e^{n+1})` is constant on plateaus
//! `[m_{k,ℓ}, n_{k,ℓ}]`, `n_{k,ℓ} = m_{k,ℓ+1} − k³`, and climbs to the next
//! anchor in `k³` geometric steps. Levels are `d = (ln 3)·2^E` with rational
//! exponents `E`, so identities are checked exactly in exponent space.
//!
//! A scalar `Z` with `P(Z = ±e^n) = q_n = (d_n − d_{n−1}) e^{−2n} / 2` has
//! `E[Z² 1{|Z| ≤ t}] = H(t)`, and `X = σ_ℓ z_ℓ Z` on the block
//! `e^{m_{k,ℓ−1}} < |Z| ≤ e^{m_{k,ℓ}}`.
//!
//! Exact magnitudes overflow any float beyond the first block, so the exact
//! mode works with symbolic positions [`Pos`] and log-domain values. The
//! scaled mode shrinks exponents by `κ`, truncates the ladder at `k_max` and
//! can be sampled.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Error, Result};
use crate::linalg::{norm, Mat};
use crate::lognum::LogNum;
use crate::sim::rng::RngStream;

pub type Q = Ratio<i64>;

const LN3: f64 = 1.098_612_288_668_109_7;

// ---------------------------------------------------------------- star sets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub sigma: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StarSetDoc {
    segments: Vec<Segment>,
    #[serde(default = "yes")]
    closure: bool,
}

fn yes() -> bool {
    true
}

/// Symmetric star-like set `cl(∪_j {t z_j : |t| ≤ σ_j})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StarSetDoc", into = "StarSetDoc")]
pub struct StarSet {
    segments: Vec<Segment>,
    closure: bool,
}

impl TryFrom<StarSetDoc> for StarSet {
    type Error = Error;

    fn try_from(doc: StarSetDoc) -> Result<Self> {
        let mut s = StarSet::new(doc.segments)?;
        s.closure = doc.closure;
        Ok(s)
    }
}

impl From<StarSet> for StarSetDoc {
    fn from(s: StarSet) -> Self {
        StarSetDoc {
            segments: s.segments,
            closure: s.closure,
        }
    }
}

impl StarSet {
    /// Normalizes directions, sorts by σ descending, requires the largest σ
    /// to be 1 and pads with copies of the first segment until
    /// `σ_j² ≥ 1/j` holds for every position `j`.
    pub fn new(raw: Vec<Segment>) -> Result<Self> {
        let Some(first) = raw.first() else {
            return param("a star set needs at least one segment");
        };
        let d = first.z.len();
        if d == 0 {
            return dim("segment directions must be nonempty");
        }
        let mut segs = Vec::with_capacity(raw.len());
        for (i, s) in raw.into_iter().enumerate() {
            if s.z.len() != d {
                return dim(format!("segment {i} has dimension {} (expected {d})", s.z.len()));
            }
            if !(s.sigma > 0.0 && s.sigma <= 1.0) {
                return param(format!("segment {i}: sigma must lie in (0, 1], got {}", s.sigma));
            }
            let n = norm(&s.z);
            if !(n > 0.0) || !n.is_finite() {
                return param(format!("segment {i}: direction must be a nonzero finite vector"));
            }
            segs.push(Segment {
                sigma: s.sigma,
                z: s.z.iter().map(|v| v / n).collect(),
            });
        }
        segs.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
        if (segs[0].sigma - 1.0).abs() > 1e-12 {
            return param(format!(
                "normalization rule violated: the largest sigma must be 1 \
                 (the star set has max |x| = 1), got {}",
                segs[0].sigma
            ));
        }
        segs[0].sigma = 1.0;
        let l1 = segs[0].clone();
        let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
        for s in segs {
            while s.sigma * s.sigma < 1.0 / (out.len() + 1) as f64 {
                out.push(l1.clone());
            }
            out.push(s);
        }
        Ok(StarSet {
            segments: out,
            closure: true,
        })
    }

    pub fn single(z: Vec<f64>) -> Result<Self> {
        StarSet::new(vec![Segment { sigma: 1.0, z }])
    }

    pub fn dim(&self) -> usize {
        self.segments[0].z.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segment `L_ℓ` (1-based); positions past the list repeat `L_1`.
    pub fn segment(&self, l: usize) -> &Segment {
        self.segments.get(l.wrapping_sub(1)).unwrap_or(&self.segments[0])
    }

    /// Euclidean distance from `p` to the star set.
    pub fn distance(&self, p: &[f64]) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let t = crate::linalg::dot(p, &s.z).clamp(-s.sigma, s.sigma);
                p.iter()
                    .zip(&s.z)
                    .map(|(a, b)| (a - t * b) * (a - t * b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Segment endpoints `±σ z` and midpoints `±σ z / 2`, deduplicated.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for s in &self.segments {
            for c in [1.0, -1.0, 0.5, -0.5] {
                let p: Vec<f64> = s.z.iter().map(|v| c * s.sigma * v).collect();
                if !out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12)) {
                    out.push(p);
                }
            }
        }
        out
    }
}

// ------------------------------------------------------------ exact ladder

/// `log₂ log₃ m_{k,ℓ}`; `ℓ = k + 1` is the seam `m_{k+1}`.
pub fn anchor_exp(k: u32, l: u32) -> i64 {
    let (k, l) = (k as i64, l as i64);
    if l == k + 1 {
        (k + 1).pow(3)
    } else {
        k.pow(3) + l * k
    }
}

pub fn next_block(k: u32, l: u32) -> (u32, u32) {
    if l < k {
        (k, l + 1)
    } else {
        (k + 1, 0)
    }
}

/// Level exponent of the ramp step `n_{k,ℓ} + j`.
pub fn ramp_exp(k: u32, l: u32, j: i64) -> Q {
    let (ki, li) = (k as i64, l as i64);
    if l < k {
        Q::from_integer(ki.pow(3) + li * ki) + Q::new(j, ki * ki)
    } else {
        Q::new((2 * ki * ki + 3 * ki + 1) * j, ki.pow(3)) + Q::from_integer(ki * ki + ki.pow(3))
    }
}

/// `ln m_{k,ℓ} = 2^{e} ln 3`.
pub fn ln_anchor(k: u32, l: u32) -> f64 {
    (anchor_exp(k, l) as f64).exp2() * LN3
}

/// Exact `m_{k,ℓ}` when it fits in `u128`.
pub fn exact_anchor(k: u32, l: u32) -> Option<u128> {
    let e = anchor_exp(k, l);
    if e <= 6 {
        Some(3u128.pow(1u32 << e))
    } else {
        None
    }
}

/// Position `n` on the exact ladder, symbolic where `n` cannot be stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Pos {
    /// `n < m_1`, level 0.
    Below { n: u64 },
    /// `n = m_{k,ℓ}`.
    Anchor { k: u32, l: u32 },
    /// `m_{k,ℓ} < n ≤ n_{k,ℓ}` with `ln n` given.
    Interior { k: u32, l: u32, ln_n: f64 },
    /// `n = n_{k,ℓ} + j`, `1 ≤ j < k³`.
    Ramp { k: u32, l: u32, j: i64 },
}

impl Pos {
    pub fn anchor(k: u32, l: u32) -> Pos {
        if l == k + 1 {
            Pos::Anchor { k: k + 1, l: 0 }
        } else {
            Pos::Anchor { k, l }
        }
    }

    /// Ramp step, normalized to the next anchor at `j = k³`.
    pub fn ramp(k: u32, l: u32, j: i64) -> Pos {
        let k3 = (k as i64).pow(3);
        if j >= k3 {
            let (nk, nl) = next_block(k, l);
            Pos::anchor(nk, nl)
        } else if j <= 0 {
            Pos::Anchor { k, l }
        } else {
            Pos::Ramp { k, l, j }
        }
    }

    pub fn from_int(n: u128) -> Pos {
        if n < 9 {
            return Pos::Below { n: n as u64 };
        }
        let mut cur = (1u32, 0u32);
        loop {
            let m = exact_anchor(cur.0, cur.1).expect("walk stays in the exact range");
            let nxt = next_block(cur.0, cur.1);
            if n == m {
                return Pos::Anchor { k: cur.0, l: cur.1 };
            }
            let Some(m_next) = exact_anchor(nxt.0, nxt.1) else {
                return Pos::Interior {
                    k: cur.0,
                    l: cur.1,
                    ln_n: (n as f64).ln(),
                };
            };
            let n_end = m_next - (cur.0 as u128).pow(3);
            if n <= n_end {
                return Pos::Interior {
                    k: cur.0,
                    l: cur.1,
                    ln_n: (n as f64).ln(),
                };
            }
            if n < m_next {
                return Pos::Ramp {
                    k: cur.0,
                    l: cur.1,
                    j: (n - n_end) as i64,
                };
            }
            cur = nxt;
        }
    }

    /// Position of `⌊ln t⌋` given `ln t`.
    pub fn from_ln_t(ln_t: f64) -> Pos {
        if !(ln_t >= 1.0) {
            return Pos::Below { n: 0 };
        }
        if ln_t < 9.0e15 {
            return Pos::from_int(ln_t.floor() as u128);
        }
        let ln_n = ln_t.ln();
        let mut cur = (1u32, 1u32);
        loop {
            let nxt = next_block(cur.0, cur.1);
            let ln_next = ln_anchor(nxt.0, nxt.1);
            if ln_n < ln_next {
                return Pos::Interior {
                    k: cur.0,
                    l: cur.1,
                    ln_n,
                };
            }
            if ln_n == ln_next {
                return Pos::anchor(nxt.0, nxt.1);
            }
            cur = nxt;
        }
    }

    /// Exponent `E` of the level `d = (ln 3)·2^E`; `None` below `m_1`.
    pub fn level_exp(&self) -> Option<Q> {
        match *self {
            Pos::Below { .. } => None,
            Pos::Anchor { k, l } | Pos::Interior { k, l, .. } => {
                Some(Q::from_integer(anchor_exp(k, l)))
            }
            Pos::Ramp { k, l, j } => Some(ramp_exp(k, l, j)),
        }
    }

    pub fn level(&self) -> f64 {
        match self.level_exp() {
            None => 0.0,
            Some(e) => q_to_f64(e).exp2() * LN3,
        }
    }

    pub fn ln_level(&self) -> f64 {
        match self.level_exp() {
            None => f64::NEG_INFINITY,
            Some(e) => LN3.ln() + q_to_f64(e) * std::f64::consts::LN_2,
        }
    }

    pub fn ln_n(&self) -> f64 {
        match *self {
            Pos::Below { n } => (n as f64).ln(),
            Pos::Anchor { k, l } => ln_anchor(k, l),
            Pos::Interior { ln_n, .. } => ln_n,
            Pos::Ramp { k, l, j } => {
                let (nk, nl) = next_block(k, l);
                let lm = ln_anchor(nk, nl);
                let off = (j - (k as i64).pow(3)) as f64;
                if lm < 700.0 {
                    (lm.exp() + off).ln()
                } else {
                    lm + (off * (-lm).exp()).ln_1p()
                }
            }
        }
    }

    fn key(&self) -> (u32, u32, u8, f64) {
        match *self {
            Pos::Below { n } => (0, 0, 0, n as f64),
            Pos::Anchor { k, l } => (k, l, 0, 0.0),
            Pos::Interior { k, l, ln_n } => (k, l, 1, ln_n),
            Pos::Ramp { k, l, j } => (k, l, 2, j as f64),
        }
    }

    pub fn cmp_pos(&self, o: &Pos) -> Ordering {
        let (a, b) = (self.key(), o.key());
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
    }

    /// Position `n − 1` where it matters for level differences.
    fn pred_level_pos(&self) -> Option<Pos> {
        match *self {
            Pos::Below { .. } | Pos::Interior { .. } => None,
            Pos::Ramp { k, l, j } => Some(Pos::ramp(k, l, j - 1)),
            Pos::Anchor { k, l } => {
                if k == 1 && l == 0 {
                    return Some(Pos::Below { n: 8 });
                }
                let (pk, pl) = if l > 0 { (k, l - 1) } else { (k - 1, k - 1) };
                let k3 = (pk as i64).pow(3);
                Some(Pos::ramp(pk, pl, k3 - 1))
            }
        }
    }

    /// `q_n` in log-domain; zero inside plateaus and below `m_1`.
    pub fn q(&self) -> LogNum {
        let Some(prev) = self.pred_level_pos() else {
            return LogNum::ZERO;
        };
        let e1 = self.level_exp().expect("ladder position");
        let ln_diff = match prev.level_exp() {
            None => LN3.ln() + q_to_f64(e1) * std::f64::consts::LN_2,
            Some(e0) => {
                let de = q_to_f64(e1 - e0) * std::f64::consts::LN_2;
                LN3.ln() + q_to_f64(e0) * std::f64::consts::LN_2 + de.exp_m1().ln()
            }
        };
        let n = self.ln_n().exp();
        LogNum::from_ln(ln_diff - 2.0 * n - std::f64::consts::LN_2)
    }
}

fn q_to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Segment blocks `(k, ℓ)`, `1 ≤ ℓ ≤ k + 1`, as `(start, end)` anchors.
fn segment_blocks_until(pos: &Pos) -> Vec<(usize, Pos, Pos)> {
    let mut out = Vec::new();
    let mut k = 1u32;
    loop {
        for l in 1..=k + 1 {
            let start = Pos::anchor(k, l - 1);
            if start.cmp_pos(pos) != Ordering::Less {
                return out;
            }
            out.push((l as usize, start, Pos::anchor(k, l)));
        }
        k += 1;
    }
}

// ----------------------------------------------------------- scaled ladder

/// Finite desk-size ladder: anchors `⌈3^{2^{e/κ}}⌉`, levels `ln m'` at anchors,
/// geometric ramps between them, constant after the last anchor.
#[derive(Debug, Clone)]
pub struct ScaledLadder {
    pub kappa: f64,
    pub k_max: u32,
    /// `(k, ℓ, m')` in increasing order, ending at `(k_max, k_max)`.
    pub anchors: Vec<(u32, u32, u64)>,
    /// Ramp length into each anchor (0 for the first).
    pub ramp_len: Vec<u64>,
    /// `d_n` for `0 ≤ n ≤ last anchor`.
    pub levels: Vec<f64>,
    /// Support points `n` with `d_n > d_{n−1}` and their `ln q_n`.
    pub support: Vec<(u64, f64)>,
}

/// Largest `n` with `e^n` representable as `f64`.
pub const MAX_SCALED_N: u64 = 709;

impl ScaledLadder {
    pub fn new(kappa: f64, k_max: u32) -> Result<Self> {
        if !(kappa >= 1.0) || !kappa.is_finite() {
            return param(format!("kappa must be ≥ 1, got {kappa}"));
        }
        if k_max == 0 {
            return param("k_max must be ≥ 1");
        }
        let mut anchors: Vec<(u32, u32, u64)> = Vec::new();
        let mut ramp_len = Vec::new();
        for k in 1..=k_max {
            let r = ((k as f64).powi(3) / kappa).ceil().max(1.0) as u64;
            for l in 0..=k {
                let e = anchor_exp(k, l) as f64 / kappa;
                let ln_m = e.exp2() * LN3;
                if ln_m > MAX_SCALED_N as f64 {
                    return Err(Error::Capability(format!(
                        "scaled block (k={k}, l={l}) has anchor 3^(2^{e:.3}) > {MAX_SCALED_N}; \
                         e^n overflows double precision (raise kappa or lower k_max)"
                    )));
                }
                let raw = (ln_m.exp() * (1.0 - 1e-12)).ceil() as u64;
                // ramps into (k, 0) belong to block k − 1
                let rk = if l == 0 && k > 1 {
                    (((k - 1) as f64).powi(3) / kappa).ceil().max(1.0) as u64
                } else {
                    r
                };
                let m = match anchors.last() {
                    None => raw.max(2),
                    Some(&(_, _, prev)) => raw.max(prev + rk),
                };
                if m > MAX_SCALED_N {
                    return Err(Error::Capability(format!(
                        "scaled block (k={k}, l={l}) needs anchor {m} > {MAX_SCALED_N}"
                    )));
                }
                ramp_len.push(if anchors.is_empty() { 0 } else { rk });
                anchors.push((k, l, m));
            }
        }
        let last = anchors.last().expect("nonempty").2 as usize;
        let mut levels = vec![0.0; last + 1];
        let first = anchors[0].2 as usize;
        for n in first..=last {
            levels[n] = (anchors[0].2 as f64).ln();
        }
        for w in 1..anchors.len() {
            let a = anchors[w - 1].2;
            let b = anchors[w].2;
            let r = ramp_len[w];
            let (da, db) = ((a as f64).ln(), (b as f64).ln());
            for n in a..=b {
                let v = if n + r <= b {
                    da
                } else {
                    let j = (n + r - b) as f64;
                    da * (db / da).powf(j / r as f64)
                };
                levels[n as usize] = if n == b { db } else { v };
            }
        }
        let mut support = Vec::new();
        for n in first..=last {
            let prev = if n == 0 { 0.0 } else { levels[n - 1] };
            let diff = levels[n] - prev;
            if diff > 0.0 {
                support.push((n as u64, diff.ln() - 2.0 * n as f64 - std::f64::consts::LN_2));
            } else if diff < 0.0 {
                return param(format!("scaled ladder is not monotone at n = {n}"));
            }
        }
        Ok(ScaledLadder {
            kappa,
            k_max,
            anchors,
            ramp_len,
            levels,
            support,
        })
    }

    pub fn level(&self, n: u64) -> f64 {
        let i = (n as usize).min(self.levels.len() - 1);
        self.levels[i]
    }

    /// Segment index for support point `n`; `None` maps to `X = 0`.
    pub fn segment_of(&self, n: u64) -> Option<usize> {
        let i = self.anchors.iter().position(|a| n <= a.2)?;
        if i == 0 {
            return None;
        }
        let (k, l, _) = self.anchors[i];
        if l == 0 {
            Some(k as usize)
        } else {
            Some(l as usize)
        }
    }

    pub fn zero_mass(&self) -> f64 {
        1.0 - 2.0 * self.support.iter().map(|(_, lq)| lq.exp()).sum::<f64>()
    }
}

// ------------------------------------------------------------------ model

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example8Mode {
    ExactLog,
    Scaled,
}

#[derive(Debug, Clone)]
pub struct Example8Model {
    star: StarSet,
    scaled: Option<ScaledLadder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QMassBound {
    pub n_enum: u64,
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub total_upper: f64,
    pub below_half: bool,
}

impl Example8Model {
    pub fn exact(star: StarSet) -> Self {
        Example8Model { star, scaled: None }
    }

    pub fn scaled(star: StarSet, kappa: f64, k_max: u32) -> Result<Self> {
        Ok(Example8Model {
            star,
            scaled: Some(ScaledLadder::new(kappa, k_max)?),
        })
    }

    pub fn star(&self) -> &StarSet {
        &self.star
    }

    pub fn mode(&self) -> Example8Mode {
        if self.scaled.is_some() {
            Example8Mode::Scaled
        } else {
            Example8Mode::ExactLog
        }
    }

    pub fn ladder(&self) -> Option<&ScaledLadder> {
        self.scaled.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.star.dim()
    }

    /// `H(t)` for `t = e^{ln_t}`.
    pub fn h_ln(&self, ln_t: f64) -> f64 {
        match &self.scaled {
            None => Pos::from_ln_t(ln_t).level(),
            Some(s) => {
                if ln_t < 0.0 {
                    0.0
                } else {
                    s.level(ln_t.floor().min(u64::MAX as f64) as u64)
                }
            }
        }
    }

    /// Truncated covariance `E[X Xᵀ 1{|Z| ≤ t}]` at `t = e^{ln_t}`.
    pub fn trunc_cov_ln(&self, ln_t: f64) -> Mat {
        match &self.scaled {
            None => self.trunc_cov_pos(&Pos::from_ln_t(ln_t)),
            Some(s) => {
                let mut out = Mat::zeros(self.dim());
                if !(ln_t >= 0.0) {
                    return out;
                }
                let top = ln_t.floor();
                for &(n, _) in &s.support {
                    if n as f64 > top {
                        break;
                    }
                    if let Some(l) = s.segment_of(n) {
                        let seg = self.star.segment(l);
                        let mass = s.level(n) - s.level(n - 1);
                        out.add_outer(seg.sigma * seg.sigma * mass, &seg.z);
                    }
                }
                out
            }
        }
    }

    /// Exact-mode truncated covariance at the symbolic position `⌊ln t⌋`.
    pub fn trunc_cov_pos(&self, pos: &Pos) -> Mat {
        let mut out = Mat::zeros(self.dim());
        for (l, start, end) in segment_blocks_until(pos) {
            let top = if end.cmp_pos(pos) == Ordering::Less { end } else { *pos };
            let mass = top.level() - start.level();
            let seg = self.star.segment(l);
            out.add_outer(seg.sigma * seg.sigma * mass, &seg.z);
        }
        out
    }

    /// `P(|X| > t)` to double precision.
    pub fn tail(&self, t: f64) -> f64 {
        let atoms: Vec<(f64, f64, Option<usize>)> = match &self.scaled {
            Some(s) => s
                .support
                .iter()
                .map(|&(n, lq)| (n as f64, lq.exp(), s.segment_of(n)))
                .collect(),
            None => [Pos::anchor(1, 0), Pos::anchor(1, 1), Pos::anchor(2, 0)]
                .iter()
                .map(|p| {
                    let seg = if matches!(p, Pos::Anchor { k: 1, l: 0 }) {
                        None
                    } else {
                        Some(1)
                    };
                    (p.ln_n(), p.q().to_f64(), seg)
                })
                .collect(),
        };
        let lt = t.ln();
        atoms
            .iter()
            .filter_map(|&(n, q, seg)| {
                let l = seg?;
                (self.star.segment(l).sigma.ln() + n > lt).then_some(2.0 * q)
            })
            .sum()
    }

    pub fn has_sampler(&self) -> bool {
        self.scaled.is_some()
    }

    /// One draw of `(X, Z)`.
    pub fn sample_xz(&self, rng: &mut RngStream) -> Result<(Vec<f64>, f64)> {
        let Some(s) = &self.scaled else {
            return Err(Error::Capability(
                "the exact-log block model cannot be sampled; use mode \"scaled\"".into(),
            ));
        };
        let u = rng.uniform();
        let sign = rng.sign();
        let mut acc = s.zero_mass();
        if u < acc {
            return Ok((vec![0.0; self.dim()], 0.0));
        }
        let mut pick = (s.support.last().expect("nonempty").0, 1.0);
        'outer: for &(n, lq) in &s.support {
            let q = lq.exp();
            for sg in [1.0, -1.0] {
                acc += q;
                if u < acc {
                    pick = (n, sg);
                    break 'outer;
                }
            }
        }
        let z = sign * pick.1 * (pick.0 as f64).exp();
        let x = match s.segment_of(pick.0) {
            None => vec![0.0; self.dim()],
            Some(l) => {
                let seg = self.star.segment(l);
                seg.z.iter().map(|v| seg.sigma * v * z).collect()
            }
        };
        Ok((x, z))
    }

    /// `q_n` for an integer `n` in log-domain.
    pub fn q_of(&self, n: u128) -> LogNum {
        match &self.scaled {
            None => Pos::from_int(n).q(),
            Some(s) => s
                .support
                .iter()
                .find(|(m, _)| *m as u128 == n)
                .map(|(_, lq)| LogNum::from_ln(*lq))
                .unwrap_or(LogNum::ZERO),
        }
    }

    /// Enumerates `q_n` for `n ≤ n_enum` and bounds the rest by
    /// `Σ_{n > n_enum} ln(n+1) e^{−2n} / 2`.
    pub fn q_mass_bound(&self, n_enum: u64) -> QMassBound {
        let partial: f64 = match &self.scaled {
            None => (1..=n_enum as u128)
                .map(|n| Pos::from_int(n))
                .filter(|p| matches!(p, Pos::Anchor { .. } | Pos::Ramp { .. }))
                .map(|p| p.q().to_f64())
                .sum(),
            Some(s) => s
                .support
                .iter()
                .filter(|(n, _)| *n <= n_enum)
                .map(|(_, lq)| lq.exp())
                .sum(),
        };
        let tail_bound = match &self.scaled {
            Some(s) if s.support.last().is_none_or(|(n, _)| *n <= n_enum) => 0.0,
            _ => {
                let n0 = (n_enum + 1) as f64;
                let first = (n0 + 1.0).ln() * (-2.0 * n0).exp() / 2.0;
                let r = (n0 + 2.0).ln() / (n0 + 1.0).ln() * (-2.0f64).exp();
                first / (1.0 - r)
            }
        };
        let total_upper = partial + tail_bound;
        QMassBound {
            n_enum,
            partial_sum: partial,
            tail_bound,
            total_upper,
            below_half: total_upper < 0.5,
        }
    }

    /// Checks the ladder identities for `k ≤ k_max` in exponent arithmetic.
    pub fn verify_block_identities(&self, k_max: u32) -> Vec<IdentityCheck> {
        match &self.scaled {
            None => verify_exact(k_max),
            Some(s) => verify_scaled(s, k_max),
        }
    }
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> IdentityCheck {
    IdentityCheck {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn verify_exact(k_max: u32) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    if k_max == 0 {
        return out;
    }
    out.push(check("m_1 = 9", exact_anchor(1, 0) == Some(9), "3^(2^1)"));
    out.push(check("m_{1,1} = 81", exact_anchor(1, 1) == Some(81), "3^(2^2)"));
    out.push(check(
        "n_{1,0} = 80",
        exact_anchor(1, 1).map(|m| m - 1) == Some(80),
        "m_{1,1} - 1^3",
    ));
    for k in 1..=k_max {
        let k3 = (k as i64).pow(3);
        for l in 0..=k + 1 {
            // exponent of m_{k,l} from its definition
            let m_exp = if l <= k {
                (k as i64).pow(3) + l as i64 * k as i64
            } else {
                (k as i64 + 1).pow(3)
            };
            let got = Pos::anchor(k, l).level_exp().expect("anchor");
            out.push(check(
                format!("anchor d_m = log m at (k={k}, l={l})"),
                got == Q::from_integer(m_exp),
                format!("d = (log 3)·2^{got}, log m = (log 3)·2^{m_exp}"),
            ));
        }
        for l in 0..=k {
            let (nk, nl) = next_block(k, l);
            let target = Q::from_integer(anchor_exp(nk, nl));
            let land = ramp_exp(k, l, k3);
            out.push(check(
                format!("ramp lands on next anchor (k={k}, l={l})"),
                land == target,
                format!("ramp exponent at j = k^3 is {land}, anchor exponent {target}"),
            ));
            let start = ramp_exp(k, l, 0);
            out.push(check(
                format!("ramp starts at plateau level (k={k}, l={l})"),
                start == Q::from_integer(anchor_exp(k, l)),
                format!("ramp exponent at j = 0 is {start}"),
            ));
            let increasing = (1..=k3).all(|j| ramp_exp(k, l, j) > ramp_exp(k, l, j - 1));
            out.push(check(
                format!("ramp strictly increasing (k={k}, l={l})"),
                increasing,
                format!("{k3} steps"),
            ));
        }
        let seam_ramp = ramp_exp(k, k, k3);
        let seam_anchor = Pos::anchor(k, k + 1).level_exp().expect("anchor");
        out.push(check(
            format!("seam m_(k,k+1) = m_(k+1) (k={k})"),
            seam_ramp == seam_anchor && seam_anchor == Q::from_integer((k as i64 + 1).pow(3)),
            format!("(2k^2+3k+1)·k^3/k^3 + k^2 + k^3 = {seam_ramp}"),
        ));
    }
    let probes = envelope_probes(k_max, 1000);
    let bad: Vec<&Pos> = probes.iter().filter(|p| !envelope_holds(p)).collect();
    out.push(check(
        "envelope H(t) ≤ log log t",
        bad.is_empty(),
        match bad.first() {
            None => format!("{} probes", probes.len()),
            Some(p) => format!("fails at {p:?}"),
        },
    ));
    out
}

fn verify_scaled(s: &ScaledLadder, k_max: u32) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    if k_max == 0 {
        return out;
    }
    for (i, &(k, l, m)) in s.anchors.iter().enumerate() {
        if k > k_max {
            break;
        }
        let d = s.level(m);
        out.push(check(
            format!("scaled anchor d_m = log m at (k={k}, l={l})"),
            d == (m as f64).ln(),
            format!("m' = {m}, d = {d}"),
        ));
        if i > 0 {
            let prev = s.anchors[i - 1].2;
            out.push(check(
                format!("scaled ramp fits (k={k}, l={l})"),
                m >= prev + s.ramp_len[i],
                format!("gap {} ≥ ramp {}", m - prev, s.ramp_len[i]),
            ));
        }
    }
    let last = s.levels.len() as u64 - 1;
    let bad = (2..=last).find(|&n| s.level(n) > (n as f64).ln() * (1.0 + 1e-15));
    out.push(check(
        "scaled envelope d_n ≤ log n",
        bad.is_none(),
        match bad {
            None => format!("n ≤ {last}"),
            Some(n) => format!("fails at n = {n}"),
        },
    ));
    let monotone = s.levels.windows(2).all(|w| w[1] >= w[0]);
    out.push(check("scaled levels nondecreasing", monotone, format!("{} levels", s.levels.len())));
    out
}

/// Probe positions for the envelope check: anchors, every ramp step,
/// plateau interiors and small integers, `count` in total.
pub fn envelope_probes(k_max: u32, count: usize) -> Vec<Pos> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for l in 0..=k {
            out.push(Pos::anchor(k, l));
            for j in 1..(k as i64).pow(3) {
                out.push(Pos::Ramp { k, l, j });
            }
        }
    }
    out.push(Pos::anchor(k_max + 1, 0));
    for k in 1..=k_max {
        for l in 0..=k {
            let lm = ln_anchor(k, l);
            let (nk, nl) = next_block(k, l);
            let span = ln_anchor(nk, nl) / lm;
            for i in 1..=30 {
                // ln n = ln m · span^{i/31}, strictly inside the plateau
                let ln_n = lm * span.powf(i as f64 / 31.0);
                if ln_n < ln_anchor(nk, nl) * (1.0 - 1e-12) && ln_n > lm {
                    out.push(Pos::Interior { k, l, ln_n });
                }
            }
        }
    }
    let mut n = 2u128;
    while out.len() < count {
        out.push(Pos::from_int(n));
        n += 1;
    }
    out.truncate(count.max(1));
    out
}

/// `d_n ≤ ln n`, which gives `H(t) ≤ ln ln t` on `[e^n, e^{n+1})`.
pub fn envelope_holds(p: &Pos) -> bool {
    match *p {
        Pos::Below { .. } => true,
        // d = (ln 3)·2^E and ln m = 2^E ln 3 share the exponent exactly
        Pos::Anchor { .. } => true,
        Pos::Interior { k, l, ln_n } => {
            let lm = ln_anchor(k, l);
            if lm < 700.0 {
                lm.exp() < ln_n.exp() + 0.5 && lm < ln_n
            } else {
                lm < ln_n
            }
        }
        Pos::Ramp { k, l, j } => {
            // ln n ≥ ln m_next − 1 because m_next ≥ 2k³; need
            // (ln 3)·2^{E_next}·(1 − 2^{−ΔE}) ≥ 1
            let (nk, nl) = next_block(k, l);
            let e_next = Q::from_integer(anchor_exp(nk, nl));
            let de = e_next - ramp_exp(k, l, j);
            if de <= Q::from_integer(0) {
                return false;
            }
            let lhs = q_to_f64(e_next) * std::f64::consts::LN_2
                + LN3.ln()
                + (-(-q_to_f64(de) * std::f64::consts::LN_2).exp_m1()).ln();
            lhs > 0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> StarSet {
        StarSet::single(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn first_block_values() {
        assert_eq!(exact_anchor(1, 0), Some(9));
        assert_eq!(exact_anchor(1, 1), Some(81));
        assert_eq!(Pos::from_int(9), Pos::Anchor { k: 1, l: 0 });
        assert_eq!(Pos::from_int(81), Pos::Anchor { k: 1, l: 1 });
        assert!(matches!(Pos::from_int(80), Pos::Interior { k: 1, l: 0, .. }));
        assert!((Pos::from_int(50).level() - 2.0 * LN3).abs() < 1e-15);
        assert!((Pos::from_int(81).level() - 4.0 * LN3).abs() < 1e-15);
        assert!((Pos::anchor(2, 0).level() - 256.0 * LN3).abs() < 1e-12);
    }

    #[test]
    fn q_values() {
        let q9 = Pos::from_int(9).q();
        assert!((q9.ln_mag - (LN3.ln() - 18.0)).abs() < 1e-12);
        assert!(Pos::from_int(10).q().is_zero());
        let q81 = Pos::from_int(81).q();
        assert!((q81.ln_mag - (LN3.ln() - 162.0)).abs() < 1e-12);
        assert!(Pos::from_int(3).q().is_zero());
    }

    #[test]
    fn ladder_identities_pass() {
        let m = Example8Model::exact(e1());
        assert!(m.verify_block_identities(0).is_empty());
        for k in [1, 3] {
            let r = m.verify_block_identities(k);
            assert!(r.iter().all(|c| c.pass), "{:?}", r.iter().find(|c| !c.pass));
        }
    }

    #[test]
    fn ramps_land_on_anchors() {
        assert_eq!(Pos::ramp(2, 0, 8), Pos::Anchor { k: 2, l: 1 });
        assert_eq!(Pos::ramp(2, 2, 8), Pos::Anchor { k: 3, l: 0 });
        assert_eq!(ramp_exp(3, 3, 27), Q::from_integer(64));
    }

    #[test]
    fn q_mass_below_half() {
        let m = Example8Model::exact(e1());
        let b = m.q_mass_bound(200);
        let want = LN3 * ((-18.0f64).exp() + (-162.0f64).exp());
        assert!((b.partial_sum - want).abs() < 1e-20);
        assert!(b.below_half && b.tail_bound < 1e-170);
        assert!(m.q_mass_bound(0).below_half);
    }

    #[test]
    fn trunc_cov_single_segment() {
        let m = Example8Model::exact(e1());
        let c = m.trunc_cov_pos(&Pos::anchor(1, 1));
        assert!((c[(0, 0)] - 9f64.ln()).abs() < 1e-12);
        assert_eq!(c[(1, 1)], 0.0);
        let below = m.trunc_cov_ln(5.0);
        assert_eq!(below[(0, 0)], 0.0);
        let big = m.trunc_cov_ln(1e200);
        assert!((big[(0, 0)] - (256.0 - 2.0) * LN3).abs() < 1e-9);
    }

    #[test]
    fn star_validation() {
        let bad = StarSet::new(vec![Segment {
            sigma: 0.8,
            z: vec![1.0, 0.0],
        }]);
        assert!(format!("{}", bad.unwrap_err()).contains("normalization rule"));
        let s = StarSet::new(vec![
            Segment { sigma: 0.5, z: vec![0.0, 2.0] },
            Segment { sigma: 1.0, z: vec![1.0, 0.0] },
        ])
        .unwrap();
        // σ² = 0.25 < 1/2 forces copies of L_1 up to position 4
        assert_eq!(s.segments().len(), 4);
        assert_eq!(s.segments()[3].z, vec![0.0, 1.0]);
        assert_eq!(s.segment(99).sigma, 1.0);
    }

    #[test]
    fn scaled_ladder_support() {
        let l = ScaledLadder::new(8.0, 2).unwrap();
        let ms: Vec<u64> = l.anchors.iter().map(|a| a.2).collect();
        assert_eq!(ms, vec![4, 5, 9, 14, 23]);
        assert!(matches!(ScaledLadder::new(8.0, 3), Err(Error::Capability(_))));
        assert!((l.zero_mass() - (1.0 - 2.0 * l.support.iter().map(|s| s.1.exp()).sum::<f64>())).abs() == 0.0);
    }

    #[test]
    fn scaled_sampler_respects_z_bound() {
        let m = Example8Model::scaled(e1(), 8.0, 2).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..1000 {
            let (x, z) = m.sample_xz(&mut rng).unwrap();
            assert!(norm(&x) <= z.abs() * (1.0 + 1e-15));
        }
        assert!(Example8Model::exact(e1()).sample_xz(&mut rng).is_err());
    }
}
