use alloc::string::String;

use crate::cascade::Regime;

/// Errors reported by the cascade toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u32),

    #[error("Hurst parameter must be a number no larger than 1, got {0}")]
    InvalidHurst(f64),

    /// Requested work or storage exceeds the configured budget.
    #[error("capacity exceeded: {what} needs {requested} but the budget is {budget}")]
    Capacity {
        what: &'static str,
        requested: u128,
        budget: u128,
    },

    #[error("operation requires the {expected} regime, parameters are {found:?}")]
    RegimeMismatch {
        expected: &'static str,
        found: Regime,
    },

    #[error("argument {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("per-level signs were not retained when the field was generated")]
    LevelsNotRetained,

    #[error("the normalisation by sqrt(n) is undefined at depth 0")]
    ZeroDepthNormalization,

    /// The characteristic function has not decayed below the quadrature
    /// tolerance at the largest admissible cut-off.
    #[error("characteristic function tail not negligible: |phi({t_max})| = {magnitude:e}")]
    TailNotNegligible { t_max: f64, magnitude: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
