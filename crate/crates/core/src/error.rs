use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size limit exceeded: {0}")]
    SizeExceeded(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("polynomial is constant")]
    ConstantPolynomial,
    #[error("expected {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("vector is zero")]
    ZeroVector,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("form {0} has a nonzero constant term or non-positive degree")]
    NonChevalleyForm(usize),
    #[error("diagonal coefficient {0} is zero")]
    ZeroCoefficient(usize),
    #[error("evaluation budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
