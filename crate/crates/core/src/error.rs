//! Error type shared by all simulation and analysis operations.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter was non-finite or outside its documented domain.
    InvalidParameter(String),
    /// Positions coincide or a direction vanishes; no angles can be defined.
    DegenerateGeometry(String),
    /// Too few samples to run a fit.
    InsufficientData { needed: usize, got: usize },
    /// All samples identical; a two-parameter fit has no spread to work with.
    DegenerateDistribution,
    /// The normal-equation system is rank deficient (fewer than three
    /// distinct abscissae for a quadratic).
    SingularFit,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} samples, got {got}")
            }
            Error::DegenerateDistribution => {
                write!(f, "degenerate distribution: all samples are identical")
            }
            Error::SingularFit => write!(f, "singular fit: design matrix is rank deficient"),
        }
    }
}

impl core::error::Error for Error {}
