use thiserror::Error;

/// Failures raised by the solver library.
///
/// Singular points of the reduced equations and domain violations of the
/// charts are reported explicitly instead of propagating NaN.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula being evaluated.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A denominator vanished (or changed sign) at the given location.
    #[error("singularity in {op} at ({at0}, {at1})")]
    Singular { op: &'static str, at0: f64, at1: f64 },

    /// The shooting bracket endpoints do not produce distinct behaviours.
    #[error("bracket [{lo}, {hi}] does not separate divergence from zero crossing")]
    Bracket { lo: f64, hi: f64 },

    /// A tolerance, grid size or range is invalid.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The adaptive integrator could not make progress.
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature failed on [{a}, {b}]: estimated error {err:e}")]
    Quadrature { a: f64, b: f64, err: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { op, reason: reason.into() }
    }

    /// True when the failure is a violated precondition rather than a numerical breakdown.
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
