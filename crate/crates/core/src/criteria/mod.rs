//! Analytic membership machinery: normalizers, the series classifier,
//! eigen-systems of truncated covariances, membership verdicts, the limsup
//! constants and predicted sets.

pub mod alpha;
pub mod eigen;
pub mod engine;
pub mod membership;
pub mod normalizer;
pub mod predicted;
pub mod series;

pub use alpha::AlphaEstimate;
pub use eigen::{eigensystem, EigenSystem};
pub use engine::{Criteria, Frame, FrameKind};
pub use membership::{Membership, MembershipVerdict};
pub use normalizer::{validate_normalizer, NormalizerSeq};
pub use predicted::{ADescriptor, PredictedSets};
pub use series::{series_classify, ClassifierConfig, SeriesClass, SeriesVerdict};
