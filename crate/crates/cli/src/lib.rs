//! Command-line companion to `qgat-core`: JSONL dataset ingestion, TOML run
//! configuration, CSV/JSON artifacts, and the experiment-grid runner.
//!
//! Everything written to disk is deterministic under a fixed seed; wall-clock
//! timing is reported on the console only, so rerunning a command overwrites
//! its outputs byte-for-byte.

pub mod config;
pub mod data;
pub mod report;
pub mod run;

use std::fmt;

/// Errors split by exit code: user errors (bad input, bad config) exit 1,
/// runtime errors (divergence, IO failures mid-run) exit 2.
#[derive(Debug)]
pub enum CliError {
    User(anyhow::Error),
    Runtime(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(e) => write!(f, "{e:#}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn user(e: impl Into<anyhow::Error>) -> Self {
        CliError::User(e.into())
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
