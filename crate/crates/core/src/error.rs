use thiserror::Error;

pub type Result<T> = std::result::Result<T, TensorError>;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: expected {expected} indices, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: index {value} in mode {mode} is out of range")]
    Range {
        line: usize,
        mode: usize,
        value: i64,
    },

    #[error("no data lines in input")]
    Empty,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("capacity exceeded: {needed} scalars requested, limit is {limit}")]
    Capacity { needed: u128, limit: u128 },

    #[error("numerical failure at iteration {iteration}: {msg}")]
    Numerical { iteration: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TensorError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        TensorError::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        TensorError::DimensionMismatch(msg.into())
    }

    /// Errors caused by the caller's arguments rather than by the data.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            TensorError::InvalidArgument(_)
                | TensorError::DimensionMismatch(_)
                | TensorError::Capacity { .. }
        )
    }
}
