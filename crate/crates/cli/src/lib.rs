//! Orchestration behind the `oamsim` binary: configuration, the train and
//! characterize pipelines, and report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
