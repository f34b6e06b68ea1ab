//! CLI errors and their exit codes.

use thiserror::Error;

/// Exit code for a failed verification or identity check.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for invalid input.
pub const EXIT_INVALID: i32 = 2;
/// Exit code for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] annuity_core::Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use annuity_core::Error as E;
        match self {
            CliError::Core(E::NumericalFailure(_) | E::ShapeMismatch { .. }) => EXIT_NUMERICAL,
            CliError::Json(_) => EXIT_NUMERICAL,
            CliError::Usage(_) | CliError::Core(_) | CliError::Output(_) => EXIT_INVALID,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
