//! Seeded experiment runner, exhaustive oracles and reports.

mod config;
mod experiments;
pub mod oracle;
mod report;
mod seed;

pub use config::{parse_mask, ConfigFile, Experiment, ExperimentConfig, OutputFormat, DEFAULT_SEED};
pub use experiments::{run_experiment, run_trials_with_seeds, trial_seed, TrialOutcome, MAX_ATTEMPTS};
pub use oracle::{enumerate_oracle, BindOracle, ConcealOracle, HonestOracle};
pub use report::{format_real, quantize, write_report, ExperimentReport, CSV_HEADER};
pub use seed::{derive_seed, splitmix64};

use thiserror::Error;

use crate::protocol::ProtocolError;
use crate::quantum::QuantumError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invariant violated in trial {trial} (seed {seed}): {message}")]
    Invariant { trial: usize, seed: u64, message: String },
    #[error("trial {trial} (seed {seed}) failed: {source}")]
    Trial { trial: usize, seed: u64, source: ProtocolError },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<QuantumError> for HarnessError {
    fn from(e: QuantumError) -> Self {
        HarnessError::Protocol(e.into())
    }
}

impl HarnessError {
    /// Process exit code: 1 for a violated invariant, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant { .. } | HarnessError::Trial { .. } | HarnessError::Protocol(_) => 1,
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Json(_) => 2,
        }
    }
}

/// Worker count when none is configured.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
