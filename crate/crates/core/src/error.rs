use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside the domain where the geometry is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Calibration parameters that cannot describe a sensor.
    #[error("invalid calibration parameters: {0}")]
    Parameter(String),

    /// Malformed or insufficient input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// The dataset does not constrain all calibration parameters.
    #[error("ill-posed dataset: {0}")]
    IllPosed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
