use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("grid of {n} samples undersamples {tones} tones (need at least {min})")]
    Undersampled { n: usize, tones: usize, min: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown Table I sequence id {0} (expected 1..=4)")]
    UnknownTableId(u32),

    #[error("shape has an empty OFF set")]
    EmptyOffSet,

    #[error("signal is identically zero")]
    ZeroSignal,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("solver failure at SCAN iteration {iteration}: {msg}")]
    Solver { iteration: usize, msg: String },

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
