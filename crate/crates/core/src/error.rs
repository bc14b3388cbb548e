use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: truncated payload at byte offset {offset}")]
    Truncated { path: PathBuf, offset: usize },

    #[error("{path}: unsupported bit depth ({detail})")]
    UnsupportedDepth { path: PathBuf, detail: String },

    #[error("{path}: malformed header at byte offset {offset}: {detail}")]
    BadHeader {
        path: PathBuf,
        offset: usize,
        detail: String,
    },

    #[error("{path}: png decode failed: {detail}")]
    Png { path: PathBuf, detail: String },

    #[error("image is {width}x{height}, need at least {min}x{min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config {origin}:{line}: {detail}")]
    Config {
        origin: String,
        line: usize,
        detail: String,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
