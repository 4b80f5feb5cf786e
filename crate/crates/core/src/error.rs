use alloc::string::String;

use crate::rrdo::ValidationReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical failure: {reason} (residual {residual:e})")]
    NumericalFailure { reason: String, residual: f64 },

    #[error(
        "spectral gap violated: eigenvalue at distance {distance:e} from the contour \
         (radius {radius:e}, margin {margin:e})"
    )]
    GapViolation {
        distance: f64,
        radius: f64,
        margin: f64,
    },

    #[error("not an RRDO: {0}")]
    NotAnRrdo(String),

    #[error("reference vector is not separating: reshaped reference is singular")]
    ReferenceNotSeparating,

    #[error("sampled matrix rejected: {}", .0.summary())]
    SampleRejected(ValidationReport),

    #[error("mean matrix has a degenerate eigenvalue 1 (cluster dimension {cluster_dim})")]
    MeanNotInME { cluster_dim: usize },

    #[error("not converged after {steps} steps (last increment {last_increment:e})")]
    NotConverged { steps: usize, last_increment: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}
