//! Config-driven experiment runner for corrlab.

pub mod config;
mod experiments;
pub mod report;

use thiserror::Error;

pub use config::{ExperimentConfig, KINDS};
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or out-of-range configuration.
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] corrlab_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) | Self::Io(_) => 1,
        }
    }
}

/// Run one experiment with `workers` threads.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Report, CliError> {
    if workers == 0 {
        return Err(CliError::Config("workers: must be at least 1".into()));
    }
    experiments::run(config, workers)
}
