use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(
        "no convergence after {iterations} iterations (last update norm {last_update_norm:e})"
    )]
    NonConvergence {
        iterations: usize,
        last_update_norm: f64,
    },

    #[error("time step {dt:e} violates the contraction guard: eps1 = {eps1:e}, eps2 = {eps2:e}")]
    GuardViolation { dt: f64, eps1: f64, eps2: f64 },

    #[error("power iteration did not reach tolerance after {iterations} iterations (estimate {estimate:e})")]
    PowerIteration { iterations: usize, estimate: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("reference integrator failed: {0}")]
    Oracle(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonConvergence { .. } => "non_convergence",
            Error::GuardViolation { .. } => "guard_violation",
            Error::PowerIteration { .. } => "power_iteration",
            Error::Singular => "singular",
            Error::Oracle(_) => "oracle",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}
