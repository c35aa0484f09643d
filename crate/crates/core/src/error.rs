use thiserror::Error;

/// Errors raised by the algebra, path, and poset kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands disagree on dimension, truncation level, or block size.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input violates a mathematical precondition (wrong scalar part,
    /// decreasing times, p < 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested object exceeds the dense-representation budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Malformed external input (CSV path, poset JSON, word string).
    #[error("invalid input: {0}")]
    Input(String),

    /// CSV cell that failed to parse, with 1-based position for diagnostics.
    #[error("invalid CSV input at row {row}, column {col}: {msg}")]
    Csv { row: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
