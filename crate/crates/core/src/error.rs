use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: max entry deviation {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary: Frobenius residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{distinct} distinct eigenvalues do not divide dimension {dim}")]
    Divisibility { distinct: usize, dim: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("query budget {queries} must be below dimension {dim}")]
    QueryBudget { queries: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
