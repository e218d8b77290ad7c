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

    #[error("invalid relative path {0:?}")]
    InvalidPath(String),

    #[error("entry name is not valid UTF-8: {0}")]
    NonUtf8Name(PathBuf),

    #[error("refusing to write into non-empty directory {0}")]
    TargetNotEmpty(PathBuf),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("expansion failed in {path}: {message}")]
    Expansion { path: String, message: String },

    #[error("audit failed: {0}")]
    Audit(String),

    #[error("name collision: {new} already occurs at {}", .sites.join(", "))]
    Collision { new: String, sites: Vec<String> },

    #[error("unsafe macro unit(s): {}", .sites.join(", "))]
    UnsafeMacro { sites: Vec<String> },

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("pass kind {0} is not invertible")]
    NotInvertible(String),

    #[error("records do not commute; conflicting file(s): {}", .files.join(", "))]
    NonCommuting { files: Vec<String> },

    #[error("invalid pattern: {0}")]
    Pattern(#[from] regex::Error),

    #[error("invalid glob: {0}")]
    Glob(#[from] globset::Error),

    #[error("json: {0}")]
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
