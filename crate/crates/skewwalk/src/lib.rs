//! Experiments, artifact formats and the command line on top of
//! [`skewwalk_core`].
//!
//! The convergence experiments live in [`lab`] and return
//! [`report::ExperimentReport`]s; [`cli`] ties them to TOML configs and
//! writes JSON and CSV artifacts.

use std::path::PathBuf;

pub mod cli;
pub mod config;
pub mod io;
pub mod lab;
pub mod parallel;
pub mod report;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] skewwalk_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: report schema version {found}, this build reads {expected}")]
    Schema { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: malformed report: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{path}: bad path dump: {reason}")]
    Dump { path: PathBuf, reason: String },

    #[error("worker pool: {0}")]
    Pool(String),
}
