//! Command-line driver: configuration, experiment orchestration and the
//! CSV/JSON artifacts read by downstream plotting.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_classify, cmd_evolve, cmd_spectrum, cmd_verify, render_checks};
pub use config::{ConfigError, RunConfig, Surface};
pub use report::{RunSummary, Status};
