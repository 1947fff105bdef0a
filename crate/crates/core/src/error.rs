use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotSpd { row: usize, pivot: f64 },

    #[error("matrix is not positive semidefinite: pivot {pivot:e} at row {row}")]
    NotPsd { row: usize, pivot: f64 },

    #[error("non-finite state at step {step}{}", path.map(|p| format!(" of path {p}")).unwrap_or_default())]
    BlowUp { path: Option<usize>, step: usize },

    #[error("quadrature did not converge: estimated relative error {estimate:e}")]
    Accuracy { estimate: f64 },

    #[error("reference computation at h = {h} failed: {source}")]
    Reference { h: f64, source: Box<Error> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
