use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto process exit codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("{0} is not a power of an odd prime")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported limit {1}")]
    FieldTooLarge(u64, u64),
    #[error("ambient space of {0} points exceeds the supported limit {1}")]
    SpaceTooLarge(u128, u64),
    #[error("element rank {0} is outside the field")]
    ForeignElement(u32),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a square")]
    NotASquare(String),
    #[error("incompatible fields for subfield embedding: {0}")]
    IncompatibleSubfield(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not orthogonal")]
    NotOrthogonal,
    #[error("point set is empty")]
    EmptySet,
    #[error("invalid edge set: {0}")]
    InvalidEdges(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("falsification: {0}")]
    Falsified(String),
}

pub type Result<T> = std::result::Result<T, Error>;
