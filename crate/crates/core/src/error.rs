use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate category path: {0}")]
    DuplicateCategory(String),

    #[error("missing parent for category {0}")]
    MissingParent(String),

    #[error("taxonomy must have exactly one root, found {0}")]
    RootCount(usize),

    #[error("unknown category: {0}")]
    UnknownCategory(String),

    #[error("duplicate document id: {0}")]
    DuplicateDocument(String),

    #[error("duplicate backend name: {0}")]
    DuplicateBackend(String),

    #[error("no seeds")]
    NoSeeds,

    #[error("invalid topic: {0}")]
    InvalidTopic(String),

    #[error("duplicate topic: {0}")]
    DuplicateTopic(String),

    #[error("negative weight {weight} for topic {topic}")]
    NegativeWeight { topic: String, weight: i64 },

    #[error("invalid user id: {0:?}")]
    InvalidUser(String),

    #[error("no relevant items judged")]
    NoRelevantJudged,

    #[error("no queries to evaluate")]
    NoQueries,

    #[error("no verdicts")]
    NoVerdicts,

    #[error("{field}: {message}")]
    InvalidRequest { field: &'static str, message: String },

    #[error("no search backends available")]
    NoBackends,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("backend {name} failed: {message}")]
    Backend { name: String, message: String },

    #[error("missing store: {0}")]
    MissingStore(PathBuf),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Http(#[from] reqwest::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
