use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported frequency: {0}")]
    UnsupportedFrequency(String),

    #[error("empty task: horizon {horizon} exceeds test length {test_length}")]
    EmptyTask { horizon: usize, test_length: usize },

    #[error("load error in {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown id: {0}")]
    UnknownId(String),

    #[error("decision error: {0}")]
    Decision(String),

    #[error("forecast archive error: {0}")]
    Archive(String),

    #[error("missing stage artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("io error on {path}: {source}")]
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
    pub fn load(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI and HTTP error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedFrequency(_) => "unsupported_frequency",
            Error::EmptyTask { .. } => "empty_task",
            Error::Load { .. } => "load",
            Error::DegenerateSeries(_) => "degenerate_series",
            Error::InvalidInput(_) => "invalid_input",
            Error::UnknownId(_) => "unknown_id",
            Error::Decision(_) => "decision",
            Error::Archive(_) => "archive",
            Error::MissingArtifact(_) => "stage_dependency",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
