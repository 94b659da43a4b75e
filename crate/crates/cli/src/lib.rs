//! Sweeps and verification runs behind the `qsl-steer` binary.
//!
//! - [`config`]: sweep parameters, JSON loading and validation.
//! - [`commands`]: CSV sweeps for the free-particle, displacement and GHZ scenarios.
//! - [`checks`]: the verification suite behind `qsl-steer verify`.
//! - [`format`]: locale-free number rendering.

pub mod checks;
pub mod commands;
pub mod config;
pub mod format;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] qsl_steering::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
