use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ann line {line}: {msg}")]
    Brat { line: usize, msg: String },

    #[error("ann line {line}: surface mismatch for {id}: annotation has {annotated:?}, text has {actual:?}")]
    SurfaceMismatch {
        line: usize,
        id: String,
        annotated: String,
        actual: String,
    },

    #[error("{id}: offsets {start}..{end} out of range for text of {len} characters")]
    OffsetOutOfRange {
        id: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("conllu line {line}: {msg}")]
    Conllu { line: usize, msg: String },

    #[error("not a tree: {0}")]
    NotATree(String),

    #[error("token {0} is not in the tree")]
    TokenNotInTree(usize),

    #[error("entity {0} has no token in this sentence")]
    NoTokenInSentence(String),

    #[error("iob: {0}")]
    Iob(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error("missing prerequisite: {0}")]
    Prerequisite(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn brat(line: usize, msg: impl Into<String>) -> Self {
        Error::Brat {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn conllu(line: usize, msg: impl Into<String>) -> Self {
        Error::Conllu {
            line,
            msg: msg.into(),
        }
    }
}
