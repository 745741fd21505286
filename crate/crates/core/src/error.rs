use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A line of a column file could not be read.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A tag sequence violates the declared scheme.
    #[error("sentence {sentence}, token {token}: {message}")]
    Validation {
        sentence: usize,
        token: usize,
        message: String,
    },

    /// Brackets in a nested file do not balance.
    #[error("sentence {sentence}: {message}")]
    Bracket { sentence: usize, message: String },

    /// Gold and predicted data do not describe the same tokens.
    #[error("alignment: {0}")]
    Alignment(String),

    /// A learner could not be trained on the supplied data.
    #[error("training: {0}")]
    Training(String),

    /// Invalid or inconsistent parameters.
    #[error("configuration: {0}")]
    Config(String),

    /// A serialized model or weight table could not be read.
    #[error("model format, line {line}: {message}")]
    Format { line: usize, message: String },

    /// An internal contract was broken by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
