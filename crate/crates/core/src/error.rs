//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset storage, model IO, fitting, and generation.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem failure while reading or writing an artifact.
    #[error("storage error at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// File does not match the expected binary layout (magic, version,
    /// missing or trailing sections).
    #[error("format error: {0}")]
    Format(String),

    /// File matches the layout but its contents are internally inconsistent
    /// (truncation, length mismatches, invalid label bytes).
    #[error("corrupt file: {0}")]
    Corruption(String),

    /// Data violates an invariant (non-finite values, bad labels).
    #[error("validation error: {0}")]
    Validation(String),

    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Parameters are out of range or inconsistent with each other.
    #[error("configuration error: {0}")]
    Config(String),

    /// The request asks for more examples or combinations than exist.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    /// A fit requires both label classes but only one is present.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// A direction-based computation received a zero vector.
    #[error("degenerate vector: {0}")]
    DegenerateVector(String),
}

impl Error {
    /// Whether this error reflects caller configuration rather than a
    /// runtime/IO failure. The CLI maps configuration errors to exit code 2
    /// and everything else to exit code 1.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Capacity(_) | Error::Shape(_)
        )
    }

    pub(crate) fn storage(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Storage {
            path: path.into(),
            source,
        }
    }
}
