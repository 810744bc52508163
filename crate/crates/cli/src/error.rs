use std::path::PathBuf;

use thiserror::Error;

/// Process exit status of the `qcrit` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Config = 1,
    NumericFailure = 2,
    Internal = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{}:{line}: {field}: {message}", path.display())]
    Field { path: PathBuf, line: usize, field: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Config { .. } | CliError::Field { .. } | CliError::Read { .. } => ExitStatus::Config,
            CliError::Write { .. } | CliError::Internal(_) => ExitStatus::Internal,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
