use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("IA did not converge after {iterations} iterations (leakage {leakage:e})")]
    NotConverged { iterations: usize, leakage: f64 },

    #[error("receiver {user}: interference spans {rank} dimensions, only {allowed} available")]
    AlignmentViolation {
        user: usize,
        rank: usize,
        allowed: usize,
    },

    #[error("degenerate channel at user {user}: {what}")]
    DegenerateChannel { user: usize, what: &'static str },

    #[error("degenerate alignment at user {user}: effective signal matrix is singular")]
    DegenerateAlignment { user: usize },

    #[error(
        "user {user} is below the zero-impact threshold: {available} null-space dimensions for {streams} streams; use a constrained precoder"
    )]
    BelowThreshold {
        user: usize,
        available: usize,
        streams: usize,
    },

    #[error("successive IA infeasible: {0}")]
    SuccessiveIaInfeasible(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Short stable identifier for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::NotConverged { .. } => "not_converged",
            Error::AlignmentViolation { .. } => "alignment_violation",
            Error::DegenerateChannel { .. } => "degenerate_channel",
            Error::DegenerateAlignment { .. } => "degenerate_alignment",
            Error::BelowThreshold { .. } => "below_threshold",
            Error::SuccessiveIaInfeasible(_) => "successive_ia_infeasible",
            Error::Input(_) => "input",
        }
    }
}
