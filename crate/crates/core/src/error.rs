use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index set {sub:?} is not a subset of {sup:?}")]
    IndexNotSubset { sub: Vec<String>, sup: Vec<String> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate index label `{0}`")]
    DuplicateLabel(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("representation has no finite total mass")]
    MissingFiniteMass,

    #[error("representation cannot integrate against its intensity measure")]
    NoQuadrature,

    #[error("non-finite compensator value {0}")]
    NonFiniteCompensator(f64),

    #[error("candidate index set is empty")]
    EmptyCandidateSet,

    #[error("chain is not transient: {0}")]
    NotTransient(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not symmetric (max asymmetry {0})")]
    NotSymmetric(f64),

    #[error("shape parameter alpha = {0} is not a positive half-integer")]
    NonHalfIntegerAlpha(f64),

    #[error("excursion grid needs at least 3 points, got {0}")]
    GridTooSmall(usize),

    #[error("length tilt is not normalized: integral = {0}")]
    UnnormalizedTilt(f64),

    #[error("budget {budget} retained no term and the discarded intensity is infinite")]
    BudgetExhausted { budget: f64 },

    #[error("weight q is not normalized: estimated integral {estimate} (expected {expected})")]
    Normalization { estimate: f64, expected: f64 },

    #[error("mean of coordinate {coordinate} is {value}; must lie in (0, inf)")]
    DegenerateMean { coordinate: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
