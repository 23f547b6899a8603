//! Error taxonomy shared by every module.
//!
//! Each variant corresponds to one machine-parsable error class. The CLI
//! prints `error[<class>]: <detail>` and maps the class to its exit status,
//! so the set of classes is part of the public contract and changes to it
//! are breaking.

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or internally inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// An example violates corpus invariants (empty response, token out of
    /// vocabulary, and so on).
    #[error("invalid example: {0}")]
    InvalidExample(String),
    /// A batch violates batch invariants (empty, mixed vocabularies).
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    /// An index is outside the structure it addresses.
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    /// A reward value or reward vector is unusable (wrong length, non-finite).
    #[error("invalid reward: {0}")]
    InvalidReward(String),
    /// An operation was called on an object in the wrong state
    /// (for example training on an unpartitioned corpus).
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// Inputs are formally valid but numerically degenerate
    /// (for example a zero-norm vector fed to a cosine).
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    /// An internal invariant failed; indicates a bug, not a user error.
    #[error("internal contract violation: {0}")]
    Contract(String),
    /// A serialized artifact could not be decoded.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-parsable class name for this error.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidExample(_) => "invalid-example",
            Error::InvalidBatch(_) => "invalid-batch",
            Error::InvalidIndex(_) => "invalid-index",
            Error::InvalidReward(_) => "invalid-reward",
            Error::InvalidState(_) => "invalid-state",
            Error::DegenerateState(_) => "degenerate-state",
            Error::Contract(_) => "internal-contract",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
