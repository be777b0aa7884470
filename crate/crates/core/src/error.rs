use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("trace is not one (residual {residual:e})")]
    TraceNotOne { residual: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("Kraus operators are not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid classifier: {0}")]
    InvalidClassifier(String),

    #[error("threshold t must be non-negative, got {0}")]
    NegativeT(f64),

    #[error("test operator is not between 0 and 1 (eigenvalue {eigenvalue:e})")]
    InvalidTestOperator { eigenvalue: f64 },

    #[error(
        "sandwich inequalities violated at t = {t}: alpha(P+) = {alpha_plus}, \
         alpha(P+ + P0) = {alpha_plus_zero}, alpha0 = {alpha0}"
    )]
    SandwichViolated {
        t: f64,
        alpha0: f64,
        alpha_plus: f64,
        alpha_plus_zero: f64,
    },

    #[error("class probability bounds must satisfy 0 <= pB < pA <= 1 (pA = {p_a}, pB = {p_b})")]
    InvalidProbabilityOrder { p_a: f64, p_b: f64 },

    #[error("outside the supported regime: {0}")]
    OutOfRegime(String),

    #[error("dimension {dim} too large for brute-force search (max {max})")]
    RegimeTooLarge { dim: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::TraceNotOne { .. } => "TraceNotOne",
            Error::NotPsd { .. } => "NotPSD",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::NotTracePreserving { .. } => "NotTracePreserving",
            Error::InvalidPovm(_) => "InvalidPovm",
            Error::InvalidClassifier(_) => "InvalidClassifier",
            Error::NegativeT(_) => "NegativeT",
            Error::InvalidTestOperator { .. } => "InvalidTestOperator",
            Error::SandwichViolated { .. } => "SandwichViolated",
            Error::InvalidProbabilityOrder { .. } => "InvalidProbabilityOrder",
            Error::OutOfRegime(_) => "OutOfRegime",
            Error::RegimeTooLarge { .. } => "RegimeTooLarge",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Format(_) => "Format",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
