use thiserror::Error;

/// Errors raised by the solvers, vector fields and verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operation undefined for a zero population (total = {total:e})")]
    ZeroPopulation { total: f64 },

    #[error("root bracketing failed for {what}: no sign change found up to {limit:e}")]
    Bracketing { what: &'static str, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("model is not selectively neutral: {0}")]
    NeutralityViolation(String),

    #[error("rate function can reach zero where it is used as a divisor: {0}")]
    DivisionDomain(String),

    #[error("state {0:?} is not polymorphic")]
    NotPolymorphic([f64; 3]),

    #[error("allelic ratio undefined: allele A is absent")]
    ZeroDenominator,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("adaptive step underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("state left the nonnegative orthant at t = {t} (component {index} = {value:e})")]
    NegativeState { t: f64, index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
