use thiserror::Error;

/// Error conditions raised by the numerical routines.
///
/// Most variants carry the offending quantity so callers can adjust
/// tolerances or budgets and retry.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The stored coefficient budget of a series was exhausted before the
    /// requested tolerance could be certified. Rebuild with more terms.
    #[error("series budget exhausted: {0}")]
    SeriesBudget(String),

    /// An intermediate value left the representable range of f64.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Adaptive quadrature did not converge within the subdivision budget.
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    /// The ODE integrator failed (step underflow, turning point violation,
    /// or non-convergence of the boundary direction).
    #[error("ode integration failed: {0}")]
    OdeFailure(String),

    /// A grid operation needs more sample points than were provided.
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// Repeated numerical differentiation exceeded its accuracy budget.
    #[error("accuracy budget exceeded: estimated error {estimate:.3e}")]
    AccuracyBudget { estimate: f64 },

    /// A function was evaluated outside its certified parameter range.
    #[error("out of supported range: {0}")]
    OutOfRange(String),

    /// A compact-support precondition was violated.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// A textual extension descriptor could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
