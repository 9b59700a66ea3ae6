//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("textproc: {0}")]
    TextProc(String),

    #[error("isa: {0}")]
    Isa(String),

    #[error("wellbeing: {0}")]
    WellBeing(String),

    #[error("leadlag: {0}")]
    LeadLag(String),

    #[error("stats: {0}")]
    Stats(String),

    #[error("synth: {0}")]
    Synth(String),

    #[error("cli: {0}")]
    Cli(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
