use thiserror::Error;

/// Errors raised by geometric operations on convex bodies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not in the open domain")]
    NotInterior,

    #[error(
        "point lies within relative distance {gap:e} of the boundary; refusing to extrapolate"
    )]
    NearBoundary { gap: f64 },

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("chord bisection did not converge within {0} iterations")]
    BisectionFailed(usize),

    #[error("affine map is singular (|det| = {0:e})")]
    SingularMap(f64),

    #[error("invalid body field `{field}`: {reason}")]
    InvalidBody { field: String, reason: String },

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("infeasible body definition: {0}")]
    Infeasible(String),

    #[error("points are not collinear (relative defect {0:e})")]
    NotCollinear(f64),

    #[error("coincident points")]
    Coincident,

    #[error("optimization did not converge: {0}")]
    NoConvergence(String),

    #[error("containment probe failed: {0}")]
    ContainmentFailure(String),

    #[error("nesting violation: {0}")]
    NestingViolation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl GeometryError {
    pub(crate) fn invalid_body(field: impl Into<String>, reason: impl Into<String>) -> Self {
        GeometryError::InvalidBody {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;
