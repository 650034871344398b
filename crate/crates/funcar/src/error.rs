//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects built over different coordinate bases were combined.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The autoregression operator has spectral radius at or above one.
    #[error("model is not stationary: spectral radius {radius:.6} >= 1")]
    NonStationary { radius: f64 },

    /// A factorization or solve failed, or a residual check was violated.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A configuration file could not be parsed or validated.
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A failure inside a Monte-Carlo run, tagged with its grid position.
    #[error("experiment at n={n}, replication {rep}: {source}")]
    Experiment {
        n: usize,
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for invalid config/input, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            Error::Experiment { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    /// Wrap an I/O failure with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
