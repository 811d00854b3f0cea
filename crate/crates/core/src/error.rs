use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field of order {0} is too large for this implementation")]
    FieldTooLarge(u64),
    #[error("modulus polynomial is not monic irreducible of degree {degree}")]
    BadModulus { degree: usize },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("polynomial division by zero")]
    ZeroModulus,
    #[error("operand has {got} coordinates, field level expects {expected}")]
    LevelMismatch { expected: usize, got: usize },
    #[error("label {label} is not an element of F_{q}")]
    BadLabel { label: u32, q: u32 },
    #[error("evaluation at the infinite place is not supported")]
    UnsupportedPlace,
    #[error("place list contains a duplicate: {0}")]
    DuplicatePlace(String),
    #[error("interpolation values are not in the image of the evaluation map")]
    InterpolationInconsistent,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no feasible place selection up to degree {max_degree} for target {target}")]
    PlacesExhausted { target: usize, max_degree: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("{tuples} basis tuples exceed the verification budget of {budget}")]
    BudgetExceeded { tuples: u128, budget: u128 },
    #[error("decomposition failed verification: {0}")]
    VerificationFailed(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("n = {n} is below the covered range starting at {start}")]
    OutOfCoverage { n: u64, start: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
