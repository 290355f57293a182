use thiserror::Error;

impl From<std::io::Error> for CchError {
    fn from(e: std::io::Error) -> Self {
        CchError::Io(e.to_string())
    }
}

pub type Result<T, E = CchError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CchError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("spectrum is not Hermitian: imaginary residue {residue:e} relative")]
    SymmetryViolation { residue: f64 },
    #[error("negative power requires a mean-zero field (relative mean {relative_mean:e})")]
    NonZeroMeanForNegativePower { relative_mean: f64 },
    #[error("product degree {degree} exceeds the supported padding degree {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },
    #[error("Picard iteration is not contracting after {iterates} iterates (last factor {factor})")]
    NonContraction { iterates: usize, factor: f64 },
    #[error("exponent constraint cannot be satisfied: {0}")]
    ConstraintUnsatisfiable(String),
    #[error("insufficient data: {found} usable points, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },
    #[error("non-positive value {value} at t = {t} cannot be log-transformed")]
    NonPositiveValue { t: f64, value: f64 },
    #[error("{0} is outside the supported range")]
    OutOfRange(String),
    #[error("quadrature failed to reach tolerance: {0}")]
    QuadratureFailure(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CchError {
    /// Short machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            CchError::InvalidGrid(_) | CchError::GridMismatch | CchError::InvalidConfig(_) => {
                "config"
            }
            CchError::NonFinite { .. } | CchError::BlowUp { .. } => "blow-up",
            CchError::NonContraction { .. } => "non-contraction",
            CchError::SymmetryViolation { .. } => "symmetry",
            CchError::NonZeroMeanForNegativePower { .. } => "nonzero-mean",
            CchError::DegreeTooHigh { .. } => "degree",
            CchError::ConstraintUnsatisfiable(_) | CchError::OutOfRange(_) => "constraint",
            CchError::InsufficientData { .. } | CchError::NonPositiveValue { .. } => "fit",
            CchError::QuadratureFailure(_) => "quadrature",
            CchError::Io(_) => "io",
        }
    }
}
