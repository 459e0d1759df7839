use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfiError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("non-convergent cavity: carrier system is singular")]
    NonConvergentCavity,
    #[error("radiation pressure diverges at f = 0 (1/m\u{3a9}\u{b2})")]
    ZeroFrequencyRpn,
    #[error("ill-conditioned sideband system at f = {frequency} Hz (condition number {condition:.3e})")]
    IllConditioned { frequency: f64, condition: f64 },
    #[error("covariance is singular or not positive definite: {0}")]
    Conditioning(String),
    #[error("invalid quadrature selection: {0}")]
    Selection(String),
    #[error("noise model rejected: {0}")]
    Noise(String),
    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, DfiError>;
