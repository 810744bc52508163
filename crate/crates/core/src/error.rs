use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcritError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size {requested} exceeds the dense limit {limit}: {advice}")]
    Capacity {
        requested: usize,
        limit: usize,
        advice: &'static str,
    },

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("quantity undefined: {0}")]
    Undefined(String),

    #[error("ill-conditioned estimate: {0}")]
    IllConditioned(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("outside the validity domain: {0}")]
    OutOfDomain(String),
}

pub type Result<T> = std::result::Result<T, QcritError>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(QcritError::Validation(msg()))
    }
}
