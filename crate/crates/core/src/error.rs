use thiserror::Error;

/// Errors raised by the algebra, the propagation engine and the scenario layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite numeric value {0}")]
    InvalidNumeric(f64),

    #[error("parameter `{name}` = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("empty input")]
    EmptyInput,

    #[error("reliability has no dimensions")]
    EmptyDimensions,

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("identifier `{0}` is already in use")]
    DuplicateId(String),

    #[error("identifier must be a non-empty token without whitespace, got `{0}`")]
    InvalidId(String),

    #[error("combined reliability {given} does not match the chain's parts ({expected}) in dimension `{dimension}`")]
    InconsistentChain {
        dimension: String,
        expected: f64,
        given: f64,
    },

    #[error("combined reliability {value} is outside the attainable range [-{alpha}, {alpha}]")]
    UnattainableCombined { value: f64, alpha: f64 },

    #[error("messages are not comparable: {0}")]
    NotComparable(String),

    #[error("reconciliation needs at least two messages on topic `{topic}`, found {found}")]
    NotEnoughMessages { topic: String, found: usize },

    #[error("message `{0}` does not carry a statement")]
    NotAStatement(String),

    #[error("unknown statement `{0}`")]
    UnknownStatement(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("expectation failed at event {step}: {entity} expected {expected}, actual {actual:.9}")]
    ExpectFailed {
        step: usize,
        entity: String,
        expected: String,
        actual: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
