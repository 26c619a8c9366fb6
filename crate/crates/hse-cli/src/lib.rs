//! Experiment orchestration for the `hse-core` simulator: configuration,
//! deterministic instance sweeps, aggregation, and figure-ready CSV/JSON
//! emission. The `hse` binary is a thin wrapper over this library.

pub mod aggregate;
pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

use std::fmt;

/// Error carrying the process exit code contract: configuration problems
/// exit with 2, numerical invariant violations with 3, and everything else
/// (IO, serialization) with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        CliError::Numerical(msg.to_string())
    }

    pub fn io(msg: impl fmt::Display) -> Self {
        CliError::Io(msg.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical invariant violation: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hse_core::Error> for CliError {
    fn from(e: hse_core::Error) -> Self {
        match e {
            hse_core::Error::Domain(m) => CliError::Config(m),
            hse_core::Error::Numerical(m) => CliError::Numerical(m),
            hse_core::Error::CapExceeded(m) => CliError::Config(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
