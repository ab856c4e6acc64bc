//! Experiment harness for the `bco-core` learners.
//!
//! - [`config`]: the TOML configuration schema.
//! - [`runner`]: `run` and `sweep`, writing JSON reports, CSV summaries and an SVG plot.
//! - [`suites`]: the `verify` suites; [`acceptance`] holds the acceptance experiments.
//! - [`cli`]: argument parsing and exit codes.

pub mod acceptance;
pub mod artifacts;
pub mod cli;
pub mod config;
pub mod plot;
pub mod runner;
pub mod setup;
pub mod suites;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
    #[error("slope assertion failed: {0}")]
    Slope(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl HarnessError {
    /// Process exit code: 1 verify failure, 2 configuration, 3 runtime, 4 slope assertion.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Verify(_) => 1,
            HarnessError::Config(_) => 2,
            HarnessError::Runtime(_) => 3,
            HarnessError::Slope(_) => 4,
        }
    }
}
