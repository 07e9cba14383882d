use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix has zero trace")]
    ZeroTrace,

    #[error("POVM element ({alpha},{k}) is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    PositivityViolation {
        alpha: usize,
        k: usize,
        min_eigenvalue: f64,
    },

    #[error("x = {x} outside admissible range ({low}, {high}]")]
    XOutOfRange { x: f64, low: f64, high: f64 },

    #[error("map scale b = {0:.3e} is degenerate")]
    DegenerateScale(f64),

    #[error("invalid rotation for group {alpha}: {reason}")]
    InvalidRotation { alpha: usize, reason: String },

    #[error("Q has spectral norm {0:.6} > 1")]
    SingularValueViolation(f64),

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("basis is not orthonormal (max Gram deviation {0:.3e})")]
    NonOrthonormal(f64),

    #[error("unknown preset or id `{0}`")]
    Unknown(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
