use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadratic fields do not match: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(i64, i64),
    #[error("{0} does not define a quadratic field (need squarefree, not 0 or 1)")]
    BadField(i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is not real")]
    NotReal,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("element is not in the lattice")]
    NotInLattice,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("weight mismatch: {0} vs {1}")]
    WeightMismatch(i64, i64),
    #[error("insufficient precision: need {need}, have {have}")]
    InsufficientPrecision { need: usize, have: usize },
    #[error("series is not in the space: first mismatch at q^{index}")]
    NotInSpace { index: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("compute budget exceeded: {0}")]
    Budget(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
