//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the reduction toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix was structurally or numerically singular during factorization.
    /// `pivot_index` is the elimination step at which no usable pivot was found.
    #[error("matrix is singular at pivot index {pivot_index}")]
    SingularMatrix { pivot_index: usize },

    /// A dense reduced operator could not be inverted at the requested point.
    #[error("reduced operator of order {order} is singular")]
    SingularReducedOperator { order: usize },

    /// Operand shapes do not line up.
    #[error("dimension mismatch: {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    /// An argument violated a precondition that is not a shape mismatch.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Dense-only operation requested on a problem above its size cap.
    #[error("operation unsupported for size {size} (cap {cap})")]
    UnsupportedSize { size: usize, cap: usize },

    /// A structured text file failed to parse.
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// Underlying I/O failure, stringified to keep the error clonable.
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// Wrap an I/O failure with the path it occurred on.
    pub fn io(path: impl ToString, err: std::io::Error) -> Self {
        Error::Io {
            path: path.to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
