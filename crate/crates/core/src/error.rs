use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid lineup: {0}")]
    Lineup(String),

    #[error("unknown player id {0}")]
    UnknownPlayer(u32),

    #[error("outcome class {0} is outside 0..=22")]
    Outcome(i64),

    #[error("no outcome rule matches raw event {0:?}")]
    UnmappedEvent(String),

    #[error("duplicate player id {0}")]
    DuplicatePlayer(u32),

    #[error("invalid value: {0}")]
    Value(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("training diverged: non-finite loss at step {step}")]
    Divergence { step: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("infinite divergence: p[{class}] > 0 but q[{class}] = 0")]
    Support { class: usize },

    #[error("embedding dimension {column} has zero variance")]
    DegenerateDimension { column: usize },

    #[error("need at least {required} observations, got {got}")]
    SampleSize { required: usize, got: usize },

    #[error("game still tied after {overtimes} overtime periods; the model's outcome distributions are degenerate")]
    DegenerateModel { overtimes: usize },

    #[error("unresolved player names: {}", .0.join(", "))]
    Resolution(Vec<String>),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    pub(crate) fn lineup(message: impl Into<String>) -> Self {
        Error::Lineup(message.into())
    }

    pub(crate) fn value(message: impl Into<String>) -> Self {
        Error::Value(message.into())
    }
}
