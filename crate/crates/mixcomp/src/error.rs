use thiserror::Error;

/// Errors surfaced by the estimation pipeline.
#[derive(Debug, Error)]
pub enum MixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("singular values are not sorted descending: {0}")]
    NotSorted(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("degenerate concentration statistics: {0}")]
    DegenerateStats(String),

    #[error("threshold bracketing failed: {0}")]
    NoBracket(String),

    #[error("delta out of range: {0}")]
    BadDelta(String),

    #[error("too few points: {0}")]
    TooFewPoints(String),

    #[error("too many partitions: {0}")]
    TooManyPartitions(String),

    #[error("invalid design: {0}")]
    BadDesign(String),

    #[error("invalid sample: {0}")]
    BadSample(String),

    #[error("linear algebra backend failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, MixError>;
