//! IO, file formats, and command implementations for the urban-canyon
//! multipath simulator. The simulation itself lives in `canyonsim-core`;
//! this crate adds config files, CSV/JSON artifacts, a parallel sweep
//! driver, and the verification command that replays the result checks
//! against a completed sweep.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod oracle;
pub mod sweep;
pub mod verify;

use std::fmt;

/// Process-level error with a documented exit code.
#[derive(Debug)]
pub enum AppError {
    /// Bad config or parameters (exit 2).
    Config(String),
    /// Filesystem trouble (exit 3).
    Io(String),
    /// The given number of verification criteria failed (exit 4).
    VerifyFailed(usize),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Io(_) => 3,
            AppError::VerifyFailed(_) => 4,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        AppError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "config error: {msg}"),
            AppError::Io(msg) => write!(f, "io error: {msg}"),
            AppError::VerifyFailed(n) => write!(f, "verification failed: {n} criteria out of bounds"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<canyonsim_core::Error> for AppError {
    fn from(err: canyonsim_core::Error) -> Self {
        AppError::Config(err.to_string())
    }
}
