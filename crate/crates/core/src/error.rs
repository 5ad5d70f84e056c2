use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("mass check failed: expected {expected}, got {actual} (tolerance {tol:e})")]
    Mass { expected: f64, actual: f64, tol: f64 },

    #[error("quadrature did not converge after {panels} panels (estimate {estimate:e}, error {error:e})")]
    NotConverged {
        panels: usize,
        estimate: f64,
        error: f64,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("values have not decayed at the grid boundary (edge/max = {ratio:e}) and no power-law tail could be fitted")]
    InsufficientDecay { ratio: f64 },

    #[error("characteristic function is not Hermitian (residual {0:e})")]
    NonHermitian(f64),

    #[error("series constant term {0} is not admissible for this operation")]
    ConstantTerm(f64),

    #[error("density vanishes or is negative at the origin (p(0) = {0})")]
    OriginValue(f64),

    #[error("marginal likelihood m(y) = {0} is not positive; the signed prior is invalid for this likelihood")]
    NonPositiveEvidence(f64),

    #[error("wavefunction is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
