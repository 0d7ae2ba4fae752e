use std::process::ExitCode;

use curvestat_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad parameters or unusable input files.
    #[error("{0}")]
    Usage(String),
    /// A computation or I/O failure after validation passed.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(3),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvariantViolated(_) | LabError::ZeroMass => CliError::Runtime(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}
