use thiserror::Error;

/// Crate-wide error type. Each variant maps to a stable machine-readable
/// code via [`Error::code`]; the CLI prints that code on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo {lo} must satisfy 1 <= lo < hi = {hi}")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("requested range end {hi} exceeds sieve bound {bound}")]
    BoundExceeded { hi: u64, bound: u64 },
    #[error("value {n} outside sieved range [{lo}, {hi})")]
    OutOfSieveRange { n: u64, lo: u64, hi: u64 },
    #[error("zero is not admissible here")]
    ZeroInput,
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("{0} is not an admissible presentation entry")]
    BadEntry(i64),
    #[error("presentation entries are multiplicatively dependent")]
    IndependenceViolation,
    #[error("field contains i; it has no normal presentation")]
    NotIFree,
    #[error("enumeration budget exceeded: omega = {omega} > {budget}")]
    EnumerationBudget { omega: u32, budget: u32 },
    #[error("geometric pair sum requires distinct bases, got a = b = {0}")]
    EqualBases(i64),
    #[error("singular linear system while deriving {0}")]
    SingularSystem(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("prime bound {bound} too small for weight {m}")]
    BoundTooSmall { bound: u64, m: u32 },
    #[error("ill-conditioned fit: {0}")]
    IllConditionedGrid(String),
    #[error("{0}")]
    Domain(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Stable code for scripts; the human-readable message may change.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidRange { .. } => "invalid-range",
            Error::BoundExceeded { .. } => "bound-exceeded",
            Error::OutOfSieveRange { .. } => "out-of-range",
            Error::ZeroInput => "zero-input",
            Error::NotSquarefree(_) => "not-squarefree",
            Error::BadEntry(_) => "bad-entry",
            Error::IndependenceViolation => "independence-violation",
            Error::NotIFree => "not-i-free",
            Error::EnumerationBudget { .. } => "enumeration-budget",
            Error::EqualBases(_) => "equal-bases",
            Error::SingularSystem(_) => "singular-system",
            Error::Overflow(_) => "overflow",
            Error::BoundTooSmall { .. } => "bound-too-small",
            Error::IllConditionedGrid(_) => "ill-conditioned-grid",
            Error::Domain(_) => "domain",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
