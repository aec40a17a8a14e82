//! Command-line layer: configuration documents, run directories and
//! manifests, CSV tables, SVG plots and the commands behind the binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod svg;
pub mod tables;

pub use commands::{Globals, Outcome, Status};
pub use config::{Query, RunConfig};
