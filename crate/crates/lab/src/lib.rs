//! Experiment driver for `wavegauge-core`: TOML run configs, CSV/JSON/grid
//! output with config hashes, canned recipes and the acceptance checks.

pub mod acceptance;
pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod recipes;
pub mod sysfile;

pub use error::{LabError, LabResult};
