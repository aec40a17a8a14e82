//! Monte Carlo: partial sums, partial-sum processes, Brownian surrogates,
//! small-ball frequencies and empirical cluster sets.

pub mod brownian;
pub mod cluster;
pub mod process;
pub mod rng;
pub mod runner;

pub use brownian::{brownian_path, kll_bounds, small_ball_estimate, small_ball_sandwich, KllBounds, SmallBall};
pub use cluster::{containment_check, empirical_cluster, ClusterReport, ContainmentSummary, DeltaNet};
pub use process::{checkpoints, simulate_partial_sums, simulate_path_process, Checkpoint, Trajectory};
pub use rng::RngStream;
pub use runner::{run_simulation, SimulationConfig};
