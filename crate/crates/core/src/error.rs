use thiserror::Error;

/// Errors produced by the robust risk computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The requested partial moment does not exist for this family.
    #[error("moment of order {power} is undefined for {family}")]
    MomentUndefined { family: String, power: u32 },

    /// The dual objective is `+inf` for every multiplier, so the robust
    /// functional is identically `+inf`.
    #[error("robust functional is +inf for every multiplier (empty feasible set)")]
    Infeasible,

    /// A bracket expansion or iterative search did not terminate.
    #[error("no convergence in {stage}")]
    NoConvergence { stage: &'static str },

    /// The linear penalization slope must exceed `max(alpha, 1 - alpha)`.
    #[error("delta = {delta} must exceed max(alpha, 1 - alpha) = {bound}")]
    DeltaTooSmall { delta: f64, bound: f64 },

    /// The growth bound `h(x) <= C (1 + |x|^q)` with `q <= p` could not be certified.
    #[error("growth bound cannot be certified: {0}")]
    UncertifiedGrowth(String),

    /// The combination of inputs has no implemented evaluation path.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed textual input (CSV, JSON, prior mini-grammar).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RiskError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> RiskError {
    RiskError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
