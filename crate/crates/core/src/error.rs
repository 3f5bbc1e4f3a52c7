use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A user-supplied knob is out of range or inconsistent. `field` names the offender.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Idx(#[from] IdxError),

    /// An error raised while simulating a specific round/client.
    #[error("round {round}, client {client}: {source}")]
    InRound {
        round: usize,
        client: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_round(self, round: usize, client: usize) -> Self {
        match self {
            e @ Error::InRound { .. } => e,
            other => Error::InRound {
                round,
                client,
                source: Box::new(other),
            },
        }
    }

    /// True when the root cause is a configuration problem (CLI exit code 1).
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Json(_) => true,
            Error::InRound { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

/// Failures while decoding IDX files.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("{file}: unexpected magic 0x{found:08x} (expected {expected})")]
    UnexpectedMagic {
        file: String,
        found: u32,
        expected: &'static str,
    },
    #[error("{file}: truncated while reading {field}")]
    Truncated { file: String, field: &'static str },
    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("{file}: invalid {field}: {message}")]
    Invalid {
        file: String,
        field: &'static str,
        message: String,
    },
}
