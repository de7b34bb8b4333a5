use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or config value failed validation. `field` is a dotted path.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    /// `f` has no positive root because reinsurance is at least as expensive
    /// as the expected claim (`gamma >= mu1`); the value function is `v = x`.
    #[error("no positive root of the drift function: gamma = {gamma} >= mu1 = {mu1}")]
    NoRoot { gamma: f64, mu1: f64 },

    #[error("Picard iteration did not converge at time step {step} after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("invariant `{suite}` violated: worst defect {defect:.3e} exceeds tolerance {tolerance:.1e}")]
    InvariantBreach {
        suite: String,
        defect: f64,
        tolerance: f64,
    },

    #[error("query at x = {x}, tau = {tau} lies in the dividend region (d = {boundary})")]
    OutOfRegion { x: f64, tau: f64, boundary: f64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
