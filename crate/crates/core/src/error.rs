use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside its documented domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// A CSV or config row could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed rows that violate the series contract (duplicates, ordering, spacing).
    #[error("schema error at line {line}: {message}")]
    Schema { line: usize, message: String },

    /// Two pieces of data disagree on cadence, stationarization or cutoff.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("cannot fit normalization: {0}")]
    Fit(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },

    #[error("model file: {0}")]
    ModelFile(#[from] ModelFileError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Violated internal invariant; reaching this is a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelFileError {
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
