use cdident_core::Error as CoreError;
use thiserror::Error;

/// Process exit status. The numeric values are a stable contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Convergence = 1,
    Config = 2,
    Integrity = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
#[error("{msg}")]
pub struct CliError {
    pub status: ExitStatus,
    pub msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Config,
            msg: msg.into(),
        }
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Convergence,
            msg: msg.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let status = match &e {
            CoreError::HashMismatch { .. } => ExitStatus::Integrity,
            CoreError::NoReference { .. }
            | CoreError::Divergence { .. }
            | CoreError::Eigen { .. }
            | CoreError::NotPositiveDefinite { .. }
            | CoreError::NonDifferentiable { .. }
            | CoreError::InsufficientWindow { .. }
            | CoreError::MissingSnapshots => ExitStatus::Convergence,
            _ => ExitStatus::Config,
        };
        Self {
            status,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(e.to_string())
    }
}
