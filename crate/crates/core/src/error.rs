use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The first state has weight outside the support of the second one.
    #[error("support violation: weight {0:.3e} outside the reference support")]
    Support(f64),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),

    #[error("invalid channel: {0}")]
    Channel(String),

    #[error("invalid measurement: {0}")]
    Measurement(String),

    #[error("invalid fixture: {0}")]
    Fixture(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
