use thiserror::Error;

/// Library-wide error type. Variants are grouped by how a caller should
/// react: `Validation`-family errors mean the input violates a documented
/// precondition, `InsufficientData` means the request needs a longer input,
/// and `ScenarioContradiction` means a scenario-level assertion failed on
/// otherwise valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("measures have no common representation: {0}")]
    Representation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("accuracy budget exceeded: {0}")]
    AccuracyBudget(String),

    #[error("expectation oracle violated its contract: {0}")]
    OracleContract(String),

    #[error("vectors are outside the vanishing-cross-element class: {0}")]
    NotInClass(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("scenario contradiction [{quantity}]: {detail}")]
    ScenarioContradiction { quantity: String, detail: String },

    #[error("i/o failure at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn contradiction(quantity: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::ScenarioContradiction { quantity: quantity.into(), detail: detail.into() }
    }
}
