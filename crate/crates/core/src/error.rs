use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported matrix dimension {0} (only 2 and 4)")]
    UnsupportedDimension(usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("invalid qubit state: {0}")]
    InvalidState(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("trivial function: constant truth table {0} has no witness")]
    TrivialFunction(String),
    #[error("not implementable: {0} is not linearly separable")]
    NotSeparable(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("behavior does not match witness shape: {0}")]
    ShapeMismatch(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("only deterministic strategies can be embedded")]
    RandomizedDecoder,
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
