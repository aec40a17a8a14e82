//! Replicated simulation runs. Replica `r` draws from stream `(seed, r)`;
//! replicas run on a worker pool and are merged in replica order, so the
//! report does not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::NormalizerSeq;
use crate::error::{param, Error, Result};
use crate::models::MomentModel;
use crate::sim::cluster::{burn_in, ClusterReport, Snapshot};
use crate::sim::process::{checkpoints, Trajectory};
use crate::sim::rng::RngStream;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "LIMSET_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub n_max: u64,
    pub theta: f64,
    pub grid_size: usize,
    pub delta: f64,
    pub burn_in_exponent: f64,
    pub replicas: u64,
    /// Functional snapshots kept per replica, taken at the last tail
    /// checkpoints with `n ≥ grid_size`.
    pub snapshots: usize,
    pub tol: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_max: 1_000_000,
            theta: 1.1,
            grid_size: 64,
            delta: 0.15,
            burn_in_exponent: 0.3,
            replicas: 1,
            snapshots: 16,
            tol: 0.25,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.replicas == 0 || self.grid_size == 0 {
            return param("simulation.n_max, replicas and grid_size must be positive");
        }
        if !(self.theta > 1.0) {
            return param("simulation.theta must exceed 1");
        }
        if !(self.delta > 0.0) || !(self.tol > 0.0) {
            return param("simulation.delta and tol must be positive");
        }
        if !(0.0..1.0).contains(&self.burn_in_exponent) {
            return param("simulation.burn_in_exponent must lie in [0, 1)");
        }
        Ok(())
    }
}

/// Value of `LIMSET_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|v| *v > 0)
}

/// All available cores; the cap still applies.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs `f` on a pool of `workers` threads, capped by `LIMSET_THREADS`.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = match thread_cap() {
        Some(cap) => workers.min(cap),
        None => workers,
    }
    .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn replica(model: &MomentModel, seq: &NormalizerSeq, cfg: &SimulationConfig, seed: u64, r: u64) -> Result<ClusterReport> {
    let mut rng = RngStream::new(seed, r);
    let traj = Trajectory::simulate(model, cfg.n_max, &mut rng)?;
    let ns = checkpoints(cfg.n_max, cfg.theta)?;
    let cut = burn_in(cfg.n_max, cfg.burn_in_exponent);
    let pts = traj.checkpoints(&ns, seq);
    let eligible: Vec<u64> = ns
        .iter()
        .copied()
        .filter(|n| *n >= cut && *n >= cfg.grid_size as u64)
        .collect();
    let snaps = eligible[eligible.len().saturating_sub(cfg.snapshots)..]
        .iter()
        .map(|&n| {
            Ok(Snapshot {
                n,
                replica: r,
                f: traj.snapshot(n, cfg.grid_size, seq.c(n as f64))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ClusterReport::build(r, &pts, snaps, cfg.delta, cut)
}

/// All replicas, merged, on `workers` threads.
pub fn run_simulation(
    model: &MomentModel,
    seq: &NormalizerSeq,
    cfg: &SimulationConfig,
    seed: u64,
    workers: usize,
) -> Result<ClusterReport> {
    cfg.validate()?;
    let reports = with_workers(workers, || {
        (0..cfg.replicas)
            .into_par_iter()
            .map(|r| replica(model, seq, cfg, seed, r))
            .collect::<Result<Vec<_>>>()
    })??;
    ClusterReport::merge(&reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::models::GaussianModel;

    fn small() -> SimulationConfig {
        SimulationConfig {
            n_max: 20_000,
            replicas: 3,
            snapshots: 4,
            ..Default::default()
        }
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let m = MomentModel::Gaussian(GaussianModel::new(Mat::identity(2)).unwrap());
        let seq = NormalizerSeq::Sqrt2nLoglog;
        let a = run_simulation(&m, &seq, &small(), 5, 1).unwrap();
        let b = run_simulation(&m, &seq, &small(), 5, 4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.snapshots.len(), 12);
        assert!(a.points.iter().all(|p| p.n >= a.burn_in_n));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"n_maxx": 3}"#).is_err());
        let c: SimulationConfig = serde_json::from_str(r#"{"n_max": 3}"#).unwrap();
        assert_eq!(c.theta, 1.1);
    }
}
