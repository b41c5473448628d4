use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("tensor of order {order} and dimension {dim} needs {expected} entries, got {found}")]
    EntryCount {
        order: usize,
        dim: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid tensor shape: {0}")]
    InvalidShape(String),

    #[error("invalid index subset: {0}")]
    InvalidSubset(String),

    #[error("tensor is not symmetric (max deviation {max_deviation:.3e})")]
    NotSymmetric { max_deviation: f64 },

    #[error("generator matrix has rank {rank} but {rows} rows; generators must be linearly independent")]
    RankDeficient { rank: usize, rows: usize },

    #[error("projection onto polyhedral cone did not converge after {iterations} iterations")]
    ProjectionNotConverged { iterations: usize },

    #[error("degenerate normalization: B x^m = {value:.3e} is not positive")]
    DegenerateNormalization { value: f64 },

    #[error("zero vector where a nonzero vector is required ({0})")]
    ZeroVector(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("dimension {dim} exceeds the enumeration cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("no candidate passed verification")]
    NoneFound,

    #[error("tensor pair is identically singular on the sampled points")]
    IdenticallySingular,

    #[error("{0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
