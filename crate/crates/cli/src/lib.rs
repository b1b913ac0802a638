//! Pipeline orchestration behind the `floorplan` binary: corpus
//! generation, sweeps, datasets, evaluation, prediction, the random
//! baseline and cross-case reports. Every command is also callable as a
//! library function so tests can drive the pipeline in-process.

pub mod artifacts;
pub mod baseline;
pub mod config;
pub mod pipeline;

pub use baseline::{BaselineRow, BaselineTable};
pub use config::PipelineConfig;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// An input file or directory does not exist (exit 2).
    #[error("missing input: {0}")]
    Missing(String),
    /// Inputs exist but are unusable or inconsistent (exit 3).
    #[error("validation failed: {0}")]
    Invalid(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Missing(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}
