use thiserror::Error;

/// Crate-wide error type. The CLI maps the variants onto exit codes:
/// regime and argument problems -> 2, validation failures -> 3, I/O -> 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested parameters leave the regime the formulas are valid in,
    /// e.g. a fixed-point solve that does not contract or a replica system
    /// whose resolvent is numerically singular.
    #[error("outside the tractable regime: {0}")]
    Regime(String),

    #[error("fixed point iteration did not converge: residual {residual:.3e} after {iterations} steps")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("exact enumeration supports at most {max} spins, got {got}")]
    EnumerationCap { max: u32, got: u32 },

    #[error("moment generating function overflows at mu = {mu}; largest exponent {exponent:.3e}")]
    MgfOverflow { mu: f64, exponent: f64 },

    /// An internal cross-check failed; indicates a bug, not bad input.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
