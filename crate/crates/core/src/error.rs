use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("cannot load {path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("batch format error in {batch}: {reason}")]
    Format { batch: String, reason: String },

    #[error("cannot decode image for card {card_id}: {message}")]
    Decode { card_id: String, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("training diverged at epoch {epoch}, step {step}: loss = {loss}")]
    Divergence { epoch: usize, step: usize, loss: f64 },

    #[error("model artifact error: {0}")]
    Artifact(String),

    #[error("label set mismatch: expected {expected}, found {found}")]
    LabelMismatch { expected: String, found: String },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("fetch error: {0}")]
    Fetch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Load { .. } => "load",
            Error::Config(_) => "config",
            Error::Format { .. } => "format",
            Error::Decode { .. } => "decode",
            Error::Input(_) => "input",
            Error::Divergence { .. } => "divergence",
            Error::Artifact(_) => "artifact",
            Error::LabelMismatch { .. } => "label-mismatch",
            Error::Empty(_) => "empty",
            Error::Fetch(_) => "fetch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn load(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.into(),
            message: message.into(),
        }
    }
}
