//! Command-line front end: config loading, trajectory CSV output, property
//! suites and α sweeps. The `nambuq` binary is a thin clap wrapper over
//! [`commands`].

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod output;
pub mod verify;

use thiserror::Error;

/// Process exit codes shared by every subcommand.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INPUT_ERROR: i32 = 1;
    pub const DRIFT_ALARM: i32 = 2;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invariant alarm: {0}")]
    Alarm(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Alarm(_) => exit::DRIFT_ALARM,
            _ => exit::INPUT_ERROR,
        }
    }
}
