use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmcError {
    #[error("stencil leaves the chart near {0:?}")]
    StencilOutOfDomain(Vec<f64>),
    #[error("warp is not positive at r = {0}")]
    NonpositiveWarp(f64),
    #[error("collar too thin at {0:?}: distance function invalid on the stencil")]
    CollarTooThin(Vec<f64>),
    #[error("operation unsupported for metric kind {0}")]
    UnsupportedMetricKind(&'static str),
    #[error("domain has no boundary")]
    NoBoundary,
    #[error("hypothesis failed: boundary margin {0:.3e}")]
    HypothesisFailed(f64),
    #[error("problem data are not rotationally symmetric")]
    NotRadial,
    #[error("field contains non-finite values")]
    DivergedField,
    #[error("newton stalled after {iterations} iterations (residual {residual:.3e})")]
    NewtonStall { iterations: usize, residual: f64 },
    #[error("jacobian is singular")]
    SingularJacobian,
    #[error("continuation failed at t = {t:.3e}: {reason}")]
    NewtonFailure { t: f64, reason: String },
    #[error("need at least two recorded t levels")]
    InsufficientHistory,
    #[error("fields are not solutions (residuals {0:.3e}, {1:.3e})")]
    NotSolutions(f64, f64),
    #[error("collar d <= d0 contains no grid nodes")]
    CollarEmpty,
    #[error("monitor ball is not contained in the domain")]
    BallOutsideDomain,
    #[error("dphi/dz lower bound is zero")]
    ZeroBeta,
    #[error("field is not a solution (residual {0:.3e})")]
    NotASolution(f64),
    #[error("field layout does not match: {0}")]
    LayoutMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PmcError>;
