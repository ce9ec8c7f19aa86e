use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate direction: eigenvalues coincide ({0:.3e})")]
    Degenerate(f64),
    #[error("eigenvector matrix nearly singular (condition {0:.3e})")]
    NearDegenerate(f64),
    #[error("contour quadrature failed: {0}")]
    ContourFailure(String),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
