use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("defining function is not real: |Im rho| = {imag:e} at probe point {probe}")]
    NonReal { imag: f64, probe: usize },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("projection did not converge after {iterations} iterations (|rho| = {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("gradient of rho vanishes at the current iterate")]
    VanishingGradient,

    #[error("coordinate chart fails: |rho_w| = {0:e}")]
    ChartFailure(f64),

    #[error("point is not strictly pseudoconvex (min Levi eigenvalue {0:e})")]
    NotPseudoconvex(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("zero direction")]
    ZeroDirection,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("structural residual {0:e} above tolerance")]
    ResidualTooLarge(f64),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
