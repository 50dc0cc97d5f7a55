use std::io;

use thiserror::Error;
use toric_kstab_core::Error as CoreError;

/// Failures surfaced by the command line, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    /// 1 invalid input, 2 numerical tolerance failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ToleranceFailure { .. } | CoreError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
