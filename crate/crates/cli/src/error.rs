use heisenmeasure_core::Error;
use thiserror::Error;

/// Failures of a job, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration, including malformed expressions.
    #[error("{0}")]
    Config(String),
    /// An invariant the program itself is responsible for was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Internal(_) => 4,
        }
    }

    /// Errors from the library are input problems unless they can only arise from a
    /// bug in how the job drives it.
    pub fn from_core(e: Error) -> Self {
        match e {
            Error::DegreeOverflow { .. } | Error::DegreeMismatch(..) => {
                CliError::Internal(e.to_string())
            }
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::from_core(e)
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 3;
