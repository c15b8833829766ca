use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vocabulary: no token reaches min_df={min_df}")]
    EmptyVocabulary { min_df: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("term id {term} out of range for vocabulary of size {dim}")]
    TermOutOfRange { term: u32, dim: usize },

    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),

    #[error("query `{0}` has no positive document in the batch")]
    MissingPositive(String),

    #[error("non-finite loss at step {step}: rank={rank_loss} reg={reg_loss} lambda={lambda}")]
    NonFiniteLoss {
        step: usize,
        rank_loss: f64,
        reg_loss: f64,
        lambda: f64,
    },

    #[error("vocabulary hash mismatch: checkpoint {checkpoint:016x}, vocabulary {vocab:016x}")]
    VocabMismatch { checkpoint: u64, vocab: u64 },

    #[error("corrupt {what} file: {reason}")]
    Corrupt { what: &'static str, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("unknown config key `{0}`")]
    UnknownConfigKey(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn corrupt(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Corrupt {
            what,
            reason: reason.into(),
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-parsable category used as the diagnostic prefix by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyVocabulary { .. } => "empty-vocabulary",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::EmptyInput(_) => "empty-input",
            Error::TermOutOfRange { .. } => "term-out-of-range",
            Error::DuplicateDocId(_) => "duplicate-doc-id",
            Error::MissingPositive(_) => "missing-positive",
            Error::NonFiniteLoss { .. } => "non-finite-loss",
            Error::VocabMismatch { .. } => "vocab-mismatch",
            Error::Corrupt { .. } => "corrupt-file",
            Error::Parse { .. } => "parse",
            Error::UnknownConfigKey(_) => "config-key",
            Error::Stage { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
