//! Empirical cluster sets as δ-nets over a tail window, and containment
//! checks against predicted sets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::criteria::PredictedSets;
use crate::error::{param, Result};
use crate::grid::GridFn;
use crate::linalg::norm;
use crate::sim::process::Checkpoint;
use crate::strassen::dist_to_scaled_strassen;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Greedy δ-net: a point is kept when it is farther than `δ` from every
/// kept point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaNet {
    pub delta: f64,
    pub points: Vec<Vec<f64>>,
}

impl DeltaNet {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return param(format!("δ must be positive and finite, got {delta}"));
        }
        Ok(DeltaNet {
            delta,
            points: Vec::new(),
        })
    }

    pub fn insert(&mut self, p: &[f64]) -> bool {
        if self.points.iter().any(|q| dist(q, p) <= self.delta) {
            return false;
        }
        self.points.push(p.to_vec());
        true
    }

    /// Union of nets, re-thinned in lexicographic order so the result does
    /// not depend on the order of `nets`.
    pub fn merge<'a>(delta: f64, nets: impl IntoIterator<Item = &'a DeltaNet>) -> Result<Self> {
        let mut all: Vec<&Vec<f64>> = nets.into_iter().flat_map(|n| n.points.iter()).collect();
        all.sort_by(|a, b| lex(a, b));
        let mut out = DeltaNet::new(delta)?;
        for p in all {
            out.insert(p);
        }
        Ok(out)
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| norm(p)).fold(0.0, f64::max)
    }
}

/// Sectors `k = 0..m` of the plane whose centre direction
/// `(cos θ_k, sin θ_k)`, `θ_k = 2π(k + ½)/m`, has a net point within
/// `radius`.
pub fn sectors_visited(points: &[Vec<f64>], sectors: usize, radius: f64) -> usize {
    (0..sectors)
        .filter(|k| {
            let th = 2.0 * std::f64::consts::PI * (*k as f64 + 0.5) / sectors as f64;
            let c = [th.cos(), th.sin()];
            points.iter().any(|p| p.len() == 2 && dist(p, &c) <= radius)
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: u64,
    pub replica: u64,
    pub f: GridFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub n: u64,
    pub replica: u64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub delta: f64,
    /// Checkpoints with `n` below this are burn-in.
    pub burn_in_n: u64,
    pub checkpoints: Vec<u64>,
    pub points: Vec<TailPoint>,
    pub net: DeltaNet,
    pub snapshots: Vec<Snapshot>,
    pub containment: Option<ContainmentSummary>,
}

impl ClusterReport {
    /// Report over the points of one replica with `n ≥ burn_in_n`.
    pub fn build(
        replica: u64,
        points: &[Checkpoint],
        snapshots: Vec<Snapshot>,
        delta: f64,
        burn_in_n: u64,
    ) -> Result<Self> {
        let tail: Vec<&Checkpoint> = points.iter().filter(|c| c.n >= burn_in_n).collect();
        if tail.is_empty() {
            return param(format!("no checkpoints at or beyond the burn-in n = {burn_in_n}"));
        }
        let mut net = DeltaNet::new(delta)?;
        for c in &tail {
            net.insert(&c.point);
        }
        Ok(ClusterReport {
            delta,
            burn_in_n,
            checkpoints: points.iter().map(|c| c.n).collect(),
            points: tail
                .iter()
                .map(|c| TailPoint {
                    n: c.n,
                    replica,
                    point: c.point.clone(),
                })
                .collect(),
            net,
            snapshots,
            containment: None,
        })
    }

    /// Commutative merge: concatenation sorted by `(replica, n)` and a
    /// canonical re-thinning of the nets.
    pub fn merge(reports: &[ClusterReport]) -> Result<Self> {
        let Some(first) = reports.first() else {
            return param("nothing to merge");
        };
        let mut points: Vec<TailPoint> = reports.iter().flat_map(|r| r.points.clone()).collect();
        points.sort_by_key(|p| (p.replica, p.n));
        let mut snapshots: Vec<Snapshot> = reports.iter().flat_map(|r| r.snapshots.clone()).collect();
        snapshots.sort_by_key(|s| (s.replica, s.n));
        let mut checkpoints: Vec<u64> = reports.iter().flat_map(|r| r.checkpoints.clone()).collect();
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Ok(ClusterReport {
            delta: first.delta,
            burn_in_n: first.burn_in_n,
            checkpoints,
            points,
            net: DeltaNet::merge(first.delta, reports.iter().map(|r| &r.net))?,
            snapshots,
            containment: None,
        })
    }
}

/// Burn-in cut `⌈n_max^β⌉`.
pub fn burn_in(n_max: u64, exponent: f64) -> u64 {
    (n_max as f64).powf(exponent).ceil() as u64
}

/// δ-net report over a point stream with checkpoints `n < n_max^β` dropped.
pub fn empirical_cluster(points: &[Checkpoint], delta: f64, burn_in_exponent: f64) -> Result<ClusterReport> {
    let n_max = points.iter().map(|c| c.n).max().unwrap_or(0);
    ClusterReport::build(0, points, Vec::new(), delta, burn_in(n_max, burn_in_exponent))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperViolation {
    pub n: u64,
    pub replica: u64,
    pub coordinate: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentSummary {
    pub tol: f64,
    /// Largest `dist(f_i, α_i𝒦)` over snapshots and coordinates.
    pub max_upper_distance: f64,
    pub upper_violations: Vec<UpperViolation>,
    /// Lower-set probes approached within `tol` by some snapshot.
    pub covered: usize,
    pub probes: usize,
    pub coverage: f64,
    /// Set when there were no probes and the coverage is vacuous.
    pub vacuous: bool,
    /// Largest `dist(f(t)/√t, A)` over snapshots and nodes `t ≥ 0.1`.
    pub max_sqrt_t_distance: f64,
    pub sqrt_t_violations: usize,
    /// Largest distance of a tail point `S_n/c_n` to `A`.
    pub max_point_distance: f64,
}

impl ContainmentSummary {
    pub fn passed(&self) -> bool {
        self.upper_violations.is_empty() && self.sqrt_t_violations == 0 && self.coverage >= 1.0
    }
}

pub fn containment_check(report: &ClusterReport, predicted: &PredictedSets, tol: f64) -> Result<ContainmentSummary> {
    let mut max_upper = 0.0f64;
    let mut upper_violations = Vec::new();
    let mut max_sqrt = 0.0f64;
    let mut sqrt_viol = 0usize;
    for s in &report.snapshots {
        for (i, c) in s.f.coordinates().iter().enumerate() {
            let d = dist_to_scaled_strassen(c, predicted.upper_box[i].upper)?;
            max_upper = max_upper.max(d);
            if d > tol {
                upper_violations.push(UpperViolation {
                    n: s.n,
                    replica: s.replica,
                    coordinate: i,
                    distance: d,
                });
            }
        }
        for j in 0..=s.f.n_grid() {
            let t = s.f.node(j);
            if t < 0.1 {
                continue;
            }
            let p: Vec<f64> = s.f.point(j).iter().map(|v| v / t.sqrt()).collect();
            let d = predicted.a.distance(&p);
            max_sqrt = max_sqrt.max(d);
            if d > tol {
                sqrt_viol += 1;
            }
        }
    }
    let probes = match report.snapshots.first() {
        Some(s) => predicted.lower_probes(s.f.n_grid())?,
        None => Vec::new(),
    };
    let covered = probes
        .iter()
        .filter(|g| {
            report
                .snapshots
                .iter()
                .any(|s| s.f.sup_dist(g).is_ok_and(|d| d <= tol))
        })
        .count();
    let max_point = report
        .points
        .iter()
        .map(|p| predicted.a.distance(&p.point))
        .fold(0.0, f64::max);
    Ok(ContainmentSummary {
        tol,
        max_upper_distance: max_upper,
        upper_violations,
        covered,
        probes: probes.len(),
        coverage: if probes.is_empty() {
            1.0
        } else {
            covered as f64 / probes.len() as f64
        },
        vacuous: probes.is_empty(),
        max_sqrt_t_distance: max_sqrt,
        sqrt_t_violations: sqrt_viol,
        max_point_distance: max_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{ADescriptor, AlphaEstimate};
    use crate::linalg::Mat;

    fn cp(n: u64, p: Vec<f64>) -> Checkpoint {
        Checkpoint { n, point: p }
    }

    #[test]
    fn constant_stream_gives_one_point() {
        let pts: Vec<Checkpoint> = (1..=100).map(|n| cp(n, vec![0.3, -0.2])).collect();
        let r = empirical_cluster(&pts, 0.1, 0.3).unwrap();
        assert_eq!(r.net.points, vec![vec![0.3, -0.2]]);
        assert_eq!(r.burn_in_n, 4);
        assert_eq!(r.points.len(), 97);
    }

    #[test]
    fn empty_tail_is_an_error() {
        assert!(ClusterReport::build(0, &[cp(1, vec![0.0])], Vec::new(), 0.1, 5).is_err());
    }

    #[test]
    fn merge_is_order_independent() {
        let mut a = DeltaNet::new(0.15).unwrap();
        let mut b = DeltaNet::new(0.15).unwrap();
        for i in 0..30 {
            let t = i as f64 * 0.21;
            a.insert(&[t.cos(), t.sin()]);
            b.insert(&[0.5 * t.sin(), 0.7 * t.cos()]);
        }
        let ab = DeltaNet::merge(0.15, [&a, &b]).unwrap();
        let ba = DeltaNet::merge(0.15, [&b, &a]).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn sectors_of_unit_circle() {
        let pts: Vec<Vec<f64>> = (0..16)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                vec![th.cos(), th.sin()]
            })
            .collect();
        assert_eq!(sectors_visited(&pts, 16, 0.5), 16);
        assert_eq!(sectors_visited(&[vec![0.0, 0.0]], 16, 0.5), 0);
    }

    fn disk_sets() -> PredictedSets {
        PredictedSets {
            upper_box: vec![AlphaEstimate::exact(1.0), AlphaEstimate::exact(1.0)],
            alpha0: AlphaEstimate::exact(1.0),
            a: ADescriptor::Ellipsoid {
                shape: Mat::identity(2),
            },
            d2_upper: true,
        }
    }

    #[test]
    fn lower_set_snapshots_are_contained_and_cover() {
        let sets = disk_sets();
        let snaps: Vec<Snapshot> = sets
            .lower_probes(32)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, f)| Snapshot {
                n: i as u64,
                replica: 0,
                f,
            })
            .collect();
        let r = ClusterReport {
            delta: 0.1,
            burn_in_n: 0,
            checkpoints: vec![],
            points: vec![],
            net: DeltaNet::new(0.1).unwrap(),
            snapshots: snaps,
            containment: None,
        };
        let s = containment_check(&r, &sets, 1e-3).unwrap();
        assert_eq!(s.coverage, 1.0);
        assert!(s.upper_violations.is_empty(), "{:?}", s.upper_violations);
        assert_eq!(s.sqrt_t_violations, 0);
    }

    #[test]
    fn steep_line_violates_upper_box() {
        let sets = disk_sets();
        let f = GridFn::from_fn(2, 32, |t| vec![1.5 * t, 0.0]).unwrap();
        let r = ClusterReport {
            delta: 0.1,
            burn_in_n: 0,
            checkpoints: vec![],
            points: vec![],
            net: DeltaNet::new(0.1).unwrap(),
            snapshots: vec![Snapshot { n: 1, replica: 0, f: f.clone() }],
            containment: None,
        };
        let s = containment_check(&r, &sets, 0.05).unwrap();
        let expect = dist_to_scaled_strassen(&f.coordinate(0).unwrap(), 1.0).unwrap();
        assert!(expect > 0.2);
        assert_eq!(s.upper_violations.len(), 1);
        assert!((s.upper_violations[0].distance - expect).abs() < 1e-12);
    }

    #[test]
    fn no_snapshots_gives_vacuous_coverage() {
        let r = ClusterReport::build(0, &[cp(5, vec![0.1, 0.1])], Vec::new(), 0.1, 1).unwrap();
        let s = containment_check(&r, &disk_sets(), 0.1).unwrap();
        assert!(s.vacuous);
        assert_eq!(s.coverage, 1.0);
    }
}
