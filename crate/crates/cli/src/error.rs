use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Malformed(String),

    #[error("{0}")]
    IllPosed(String),

    /// The fit stopped at the iteration cap; parameters were still written.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::IllPosed(_) => 3,
            CliError::NotConverged(_) => 4,
        })
    }

    /// Library errors raised while validating flags.
    pub fn from_flags(e: accelcal::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    /// Library errors raised while processing input files.
    pub fn from_input(e: accelcal::Error) -> Self {
        match e {
            accelcal::Error::IllPosed(_) => CliError::IllPosed(e.to_string()),
            other => CliError::Malformed(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
