use lipfree_lp::{LpError, ScalarError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("{what}: {needed} exceeds capacity {cap}")]
    Capacity { what: &'static str, needed: usize, cap: usize },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("action error: {0}")]
    Action(String),
    #[error("span error: {0}")]
    Span(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("operands live on different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl From<ScalarError> for Error {
    fn from(e: ScalarError) -> Self {
        match e {
            ScalarError::Irrational(_) => Error::Mode(e.to_string()),
            _ => Error::Malformed(e.to_string()),
        }
    }
}
