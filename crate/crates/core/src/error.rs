use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input syntax. `line` is 1-based when known.
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("unknown {kind} `{id}`")]
    Lookup { kind: &'static str, id: String },

    #[error("schema `{0}` already exists in corpus")]
    NameCollision(String),

    #[error("stale manifest: content hash of `{}` does not match", path.display())]
    StaleManifest { path: PathBuf },

    #[error("unknown schema `{0}` in corpus")]
    UnknownSchema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code used by the CLI (and mirrored by the C status codes).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Parse { .. } | Error::Io { .. } => 2,
            Error::Validation(_)
            | Error::Lookup { .. }
            | Error::NameCollision(_)
            | Error::StaleManifest { .. }
            | Error::UnknownSchema(_) => 3,
            Error::UndefinedMetric(_) => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        let line = if e.line() > 0 { Some(e.line()) } else { None };
        Error::parse(line, e.to_string())
    }
}
