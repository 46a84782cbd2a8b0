use thiserror::Error;

/// Crate-wide error type.  Variants are grouped by the kind of failure so a
/// caller (in particular the CLI) can map them onto coarse exit classes:
/// construction/domain errors, resource-budget refusals, precision refusals,
/// and internal identity failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("expected a finite place, got the archimedean place")]
    ExpectedPrime,

    #[error("invalid ball: {0}")]
    InvalidBall(String),

    #[error("invalid approximation function: {0}")]
    InvalidFunction(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("source ball and target must sit at distinct places")]
    SamePlace,

    #[error("unsupported ball combination: {0}")]
    UnsupportedBallCombination(String),

    #[error("{0}")]
    OutOfRange(String),

    #[error("budget exceeded: {what} needs {requested} but the limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error(
        "insufficient precision: n = {offending_n} needs {required} digits \
         but the sample carries {available}"
    )]
    PrecisionInsufficient {
        offending_n: u64,
        required: u32,
        available: u32,
    },

    #[error("internal identity failed: {0}")]
    IdentityFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by the CLI to pick an exit code.
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::BudgetExceeded { .. } => ExitClass::Budget,
            Error::PrecisionInsufficient { .. } => ExitClass::Precision,
            Error::IdentityFailure(_) => ExitClass::Identity,
            _ => ExitClass::Usage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage,
    Budget,
    Precision,
    Identity,
}
