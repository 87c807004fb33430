use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),

    #[error("modulus {0:?} is reducible over the prime field")]
    Reducible(Vec<u64>),

    #[error("modulus has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("modulus {0:?} is not monic with coefficients in [0, p)")]
    BadModulus(Vec<u64>),

    #[error("field of order {0} exceeds the supported maximum")]
    FieldTooLarge(u128),

    #[error("element encoding {value} out of range for field of order {q}")]
    ElementOutOfRange { value: u64, q: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("digit base {0} is smaller than 2")]
    BadBase(u64),

    #[error("polynomial is constant")]
    ConstantPolynomial,

    #[error("polynomial is zero")]
    ZeroPolynomial,

    #[error("bad index set: {0}")]
    BadIndexSet(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("zero coefficient in diagonal equation at position {0}")]
    ZeroCoefficient(usize),

    #[error("empty subset at position {0}")]
    EmptySubset(usize),

    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("subset search over n = {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("precision p^{available} is insufficient, need p^{needed}")]
    PrecisionInsufficient { needed: u64, available: u64 },

    #[error("system is not a diagonal equation: {0}")]
    NotDiagonal(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid instance field `{field}`: {message}")]
    InvalidInstance { field: String, message: String },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}
