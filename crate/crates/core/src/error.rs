use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadratic form is degenerate (det = 0)")]
    DegenerateForm,

    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("{0} is neither prime nor the infinite place")]
    NotPrime(u128),

    #[error("enumeration budget exceeded at modulus {modulus}: needs {needed} evaluations, budget {budget}")]
    BudgetExceeded {
        modulus: u128,
        needed: u128,
        budget: u128,
    },

    #[error("enumeration needs about {needed} steps, budget {budget}")]
    EnumerationBudget { needed: u128, budget: u128 },

    #[error("height bound too large: values may overflow 128-bit arithmetic")]
    HeightTooLarge,

    #[error("quadric has no points modulo {0}")]
    NoLocalPoints(u128),

    #[error("omega({0}) = 0: the stratum is empty")]
    EmptyStratum(u128),

    #[error("arithmetic overflow")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization failed for {0}")]
    FactorizationFailed(u128),

    #[error("cache i/o: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
