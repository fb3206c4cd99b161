use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between {0} and {1}")]
    DisconnectedGraph(usize, usize),
    #[error("input array is not symmetric at ({0}, {1})")]
    NonSymmetricInput(usize, usize),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("instance too large for exact mode: {what} = {size} exceeds {limit}")]
    TooLargeForExact { what: &'static str, size: usize, limit: usize },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("random generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("power iteration did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("{0} is not a prime >= 3")]
    NotPrime(u32),
    #[error("{what} = {size} exceeds the supported maximum {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("coefficient {index} has modulus {modulus} > 1")]
    AlphaOutOfBall { index: usize, modulus: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("random subspace is rank deficient after {0} attempts")]
    RankDeficient(usize),
    #[error("rejection budget of {budget} exhausted for member {member}")]
    RejectionBudgetExhausted { member: usize, budget: usize },
    #[error("interval of length {n} is too short for support radius {s} (need n > 2s)")]
    IntervalTooShort { n: usize, s: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("space too small: {0}")]
    SpaceTooSmall(String),
    #[error("operator is not a contraction: norm {0}")]
    NotAContraction(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not an expander: {0}")]
    NotAnExpander(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
