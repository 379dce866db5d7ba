use thiserror::Error;

pub type Result<T> = std::result::Result<T, MeanError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("`{name}` at position {pos} takes {expected} argument(s), found {found}")]
    Arity {
        pos: usize,
        name: String,
        expected: String,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid envelope table: {0}")]
    InvalidEnvelope(String),

    /// Envelope phase `1/t` is no longer meaningful in double precision.
    #[error("envelope phase not representable at u = {u} (limit {limit})")]
    PhaseRange { u: f64, limit: f64 },

    #[error(
        "gauss iteration did not converge after {iterations} steps: last pair ({}, {}), gap {gap:e}",
        last.0, last.1
    )]
    NonConvergence {
        iterations: usize,
        last: (f64, f64),
        gap: f64,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("insufficient samples: need at least {needed} populated windows, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("order pair (1, 0) is excluded from the invariance-order law")]
    ExcludedPair,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl MeanError {
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, MeanError::NonConvergence { .. })
    }
}
