use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid order/degree pair (n = {n}, m = {m}): |m| must not exceed n")]
    InvalidOrderDegree { n: u32, m: i32 },

    #[error("zenith angle {0} outside [0, pi]")]
    ThetaOutOfRange(f64),

    #[error("argument must be strictly positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("field point coincides with a source or expansion centre")]
    CoincidentPoints,

    #[error("point at distance {distance} lies inside the validity radius {radius}")]
    InsideValidityRadius { distance: f64, radius: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("source at distance {distance} is not strictly inside the bounding sphere of radius {radius}")]
    SourceOutsideSphere { distance: f64, radius: f64 },

    #[error("directional weight takes negative value {0}")]
    NegativeWeight(f64),

    #[error("weight not representable at order {order}: projection residual {residual}")]
    ProjectionResidual { order: usize, residual: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("linear solve failed: relative residual {0}")]
    LinearSolve(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
