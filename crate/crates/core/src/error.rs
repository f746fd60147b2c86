use thiserror::Error;

/// Errors raised by instance construction and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CspError {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("malformed constraint: {0}")]
    Structure(String),

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("refused: {0}")]
    Guard(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("sparsification failed after {attempts} attempts; worst message {worst}")]
    SparsifyFailed { attempts: usize, worst: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, CspError>;
