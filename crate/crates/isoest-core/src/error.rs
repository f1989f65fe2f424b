use alloc::string::String;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the domain of the requested operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A vector or operator has the wrong shape.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Power iteration ran out of iterations.
    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A brute-force oracle would exceed its dimension budget.
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An internal consistency check failed; this indicates a bug.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
