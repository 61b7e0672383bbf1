use alloc::string::String;

use thiserror::Error;

/// Failure reported by an external model backend (HTTP service, stub, ...).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct BackendError {
    pub message: String,
}

impl BackendError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class {0:?} has no training examples")]
    MissingClass(String),

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("unknown zero-shot label {0:?}")]
    UnknownLabel(String),

    #[error("missing {what} labels in thread {thread_id}")]
    MissingLabels {
        thread_id: String,
        what: &'static str,
    },

    #[error("thread {0:?} has no counterpart")]
    UnmatchedThread(String),

    #[error("{backend} backend failed on thread {thread_id}: {source}")]
    Backend {
        thread_id: String,
        backend: &'static str,
        #[source]
        source: BackendError,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }
}
