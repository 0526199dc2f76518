use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("value {value} outside validity window [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("degenerate quasi-energies (gap < {gap_tol:e}) at pairs {pairs:?}")]
    Degenerate {
        gap_tol: f64,
        pairs: Vec<(usize, usize)>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("hermiticity violation: imaginary residue {residue:e}")]
    HermiticityViolation { residue: f64 },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("empty region: no momentum ladder index falls inside the cells")]
    EmptyRegion,

    #[error("configuration error: {0}")]
    Config(String),

    /// Reading or writing an artifact failed, or its layout is malformed.
    #[error("i/o error: {0}")]
    Io(String),

    /// Eigensolver or other numerical failure, with diagnostics.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Numeric(_) | Error::SingularFit(_))
    }
}
