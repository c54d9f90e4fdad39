use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("duplicate rating for user {user:?} and item {item:?}")]
    DuplicateRating { user: String, item: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("vocabulary is empty after applying min_count={0}")]
    EmptyVocabulary(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("unknown item id {0:?}")]
    UnknownItem(String),

    #[error("unknown user id {0:?}")]
    UnknownUser(String),

    #[error("similarity undefined for zero-norm vector")]
    ZeroNorm,

    #[error("vector kinds differ: {0} vs {1}")]
    KindMismatch(&'static str, &'static str),

    #[error("document has no in-vocabulary tokens")]
    NotInferable,

    #[error("recall undefined for an empty relevant set")]
    EmptyRelevantSet,

    #[error("similarity index is empty")]
    EmptyIndex,

    #[error("no warm items to pair against")]
    NoWarmItems,

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("{0}")]
    Data(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
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

    /// Process exit code for this error: 1 usage, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Model(_) => 3,
            _ => 2,
        }
    }
}
