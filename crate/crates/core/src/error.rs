use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("values do not form a permutation of 1..={n}: {reason}")]
    NotABijection { n: usize, reason: String },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    TooLargeForEnumeration { n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("excursion exceeded max length {max_len} (q = {q})")]
    ExcursionTooLong { max_len: usize, q: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
