use thiserror::Error;

use crate::experiments::Trajectory;
use crate::so3::Vec3;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system (det = {det:e})")]
    Singular { det: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec3,
    },

    #[error("cannot normalize a vector of length {norm:e}")]
    DegenerateNormalization { norm: f64 },

    #[error("polar angle undefined: projection onto the x1-x2 plane vanishes")]
    DegenerateProjection,

    #[error("analytic period undefined for a zero field")]
    ZeroField,

    #[error("final director has vanishing length ({norm:e})")]
    ZeroVector { norm: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        partial: Box<Trajectory>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Singular { .. } => "SINGULAR_MATRIX",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::DegenerateNormalization { .. } => "DEGENERATE_NORMALIZATION",
            Error::DegenerateProjection => "DEGENERATE_PROJECTION",
            Error::ZeroField => "ZERO_FIELD",
            Error::ZeroVector { .. } => "ZERO_VECTOR",
            Error::StepFailed { source, .. } => source.code(),
        }
    }
}
