use thiserror::Error;

/// Errors raised by the solvers and input validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("kernel constraint system is infeasible (arbitrage or contradictory prices)")]
    Infeasible,

    #[error("{n} states exceeds the enumeration limit of {limit}")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("{n} states exceeds the permutation limit of {limit} for generic solvers")]
    TooManyStates { n: usize, limit: usize },

    #[error("values must be strictly ordered x < y < z (got {x}, {y}, {z})")]
    OrderingViolated { x: String, y: String, z: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("probability level {0} outside (0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("contraction amount {t} outside [0, {max}]")]
    ContractionOutOfRange { t: f64, max: f64 },

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("no sign change of the first-order condition on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("root not bracketed for level {0}")]
    RootBracketFailure(f64),

    #[error("empty feasible range [{lo}, {hi}]")]
    EmptyFeasibleRange { lo: f64, hi: f64 },

    #[error("cost integral diverges: {0}")]
    IntegrationDivergence(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    /// Whether the error stems from bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NumericalFailure(_)
                | Error::RootBracketFailure(_)
                | Error::BracketFailure { .. }
                | Error::IntegrationDivergence(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
