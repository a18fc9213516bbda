use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("reified fragments without a main triple for fact ids: {}", .0.join(", "))]
    OrphanFacts(Vec<String>),

    #[error("fact refers to unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("duplicate item identifier `{0}`")]
    DuplicateItem(String),

    #[error("invalid item `{id}`: {reason}")]
    InvalidItem { id: String, reason: String },

    #[error("index format version {found} does not match supported version {expected}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("corrupt index bundle: {0}")]
    CorruptIndex(String),

    #[error("item not found: {0}")]
    NotFound(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("question has no terms after stopword removal")]
    EmptyQuestion,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
