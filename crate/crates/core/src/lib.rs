//! Numerical laboratory for cluster sets of normalized partial sums
//! `S_n / c_n` and of partial-sum processes `S_(n) / c_n`.
//!
//! The crate is organised around four layers:
//!
//! * [`strassen`]: the Dirichlet energy `I(g)`, its minimizer over sup-norm
//!   tubes (taut string), distances to scaled Strassen balls `αK`, and
//!   direction projections of vector-valued grid functions.
//! * [`models`]: distribution descriptors with analytic truncated second
//!   moments: Gaussian, independent components, and the heavy-tailed
//!   double-exponential block construction (exact log-domain and a scaled
//!   desk-size surrogate that can be sampled).
//! * [`criteria`]: normalizer validation, the three-valued series
//!   classifier, `α₀` / coordinate `αᵢ` constants, eigen-systems of the
//!   truncated covariances, and point / function membership verdicts.
//! * [`sim`]: deterministic Monte Carlo of partial sums, partial-sum
//!   processes and Brownian surrogates, small-ball estimates, empirical
//!   δ-net cluster sets and containment checks.
//!
//! The [`cli`] module backs the `limset` binary and the runnable examples.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod lognum;
pub mod models;
pub mod reference;
pub mod sim;
pub mod strassen;
pub mod verify;

pub use error::{Error, Result};
pub use grid::GridFn;
