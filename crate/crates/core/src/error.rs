use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NumericalFailure { sweeps: usize, residual: f64 },

    #[error("value {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("not a projection: {0}")]
    InvalidProjection(String),

    #[error("not an effect: {0}")]
    InvalidEffect(String),

    #[error("not a symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("set of {size} projections exceeds the commutator cap of {cap}")]
    ResourceLimit { size: usize, cap: usize },

    #[error("invariant violated: {check} (residual {residual:e})")]
    InvariantViolation { check: String, residual: f64 },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
}

impl Error {
    pub(crate) fn violation(check: impl Into<String>, residual: f64) -> Self {
        Error::InvariantViolation {
            check: check.into(),
            residual,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
