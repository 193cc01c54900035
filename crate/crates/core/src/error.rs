use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: invalid record: {message}")]
    Validation { line: u64, message: String },

    #[error("phrase file line {line}: {message}")]
    PhraseLoad { line: usize, message: String },

    #[error("background vocabulary is empty")]
    EmptyVocabulary,

    #[error("unknown phrase id {0}")]
    UnknownPhrase(u32),

    #[error("invalid window: {0}")]
    Window(String),

    #[error("background empty over window")]
    BackgroundEmpty,

    #[error("series has no peak (all zero or undefined)")]
    NoPeak,

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid synth spec at `{path}`: {message}")]
    Spec { path: String, message: String },

    #[error("count cache format mismatch ({0}); re-scan required")]
    CacheVersion(String),

    #[error("corrupt count cache: {0}")]
    CacheCorrupt(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {source}")]
    InputIo {
        path: PathBuf,
        line: u64,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
