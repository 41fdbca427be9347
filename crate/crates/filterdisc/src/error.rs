use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square or has dimension below 2 (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("overlap matrix is not Hermitian at ({i},{j})")]
    NotHermitian { i: usize, j: usize },
    #[error("diagonal entry {i} is not 1")]
    NonUnitDiagonal { i: usize },
    #[error("overlap |o_{i}{j}| = {value} is not below 1")]
    OverlapOutOfRange { i: usize, j: usize, value: f64 },
    #[error("states are linearly dependent (smallest Gram eigenvalue {min_eigenvalue:e})")]
    LinearlyDependent { min_eigenvalue: f64 },
    #[error("numerical breakdown: reciprocal diagonal {index} is {value:e}")]
    NumericalBreakdown { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown outcome label: {0}")]
    UnknownLabel(String),
    #[error("invalid angle: {0}")]
    InvalidOmega(f64),
    #[error("invalid Jordan angle: {0}")]
    InvalidTheta(f64),
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("invalid grouping: {0}")]
    GroupingError(String),
    #[error("inconsistent staging: {0}")]
    InconsistentStaging(String),
    #[error("nulling angle requested for two zero amplitudes")]
    ZeroInput,
    #[error("objective is not finite at {0:?}")]
    NonFiniteObjective(Vec<f64>),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

pub type Result<T> = std::result::Result<T, Error>;
