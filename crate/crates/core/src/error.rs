use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row, line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("missing or invalid header, expected `frame,entity_id,x_cm,y_cm`")]
    BadHeader,

    #[error("out of bounds, line {line}")]
    OutOfBounds { line: usize },

    #[error("duplicate frame {frame} for entity {entity}, line {line}")]
    DuplicateFrame { entity: u32, frame: usize, line: usize },

    #[error("non-monotone frame {frame} for entity {entity}, line {line}")]
    NonMonotoneFrame { entity: u32, frame: usize, line: usize },

    #[error("point ({x}, {y}) lies outside the field")]
    OutsideField { x: f64, y: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not positive semidefinite")]
    NotPositiveSemidefinite,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("kalman: innovation covariance singular at step {step} (condition number {condition:e})")]
    SingularInnovation { step: usize, condition: f64 },

    #[error("kalman: diffuse innovation block rank deficient at step {step}")]
    DiffuseRankDeficient { step: usize },

    #[error("estimation: non-finite log-likelihood at starting parameters")]
    NonFiniteLikelihood,

    #[error("window of length {length} is too short (minimum {minimum})")]
    WindowTooShort { length: usize, minimum: usize },

    #[error("synthetic: joint covariance singular")]
    SingularJoint,

    #[error("vae: non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveSemidefinite
                | Error::NotPositiveDefinite
                | Error::SingularInnovation { .. }
                | Error::DiffuseRankDeficient { .. }
                | Error::NonFiniteLikelihood
                | Error::SingularJoint
                | Error::NonFiniteLoss { .. }
        )
    }
}
