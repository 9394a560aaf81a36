use std::fmt;

/// Everything the toolkit can fail with. [`Error::exit_code`] maps the
/// variants onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}:{column}: {message}")]
    Malformed {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Domain(String),
}

impl Error {
    /// 1 for domain errors, 2 for bad invocations and unreadable or malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 1,
            _ => 2,
        }
    }

    pub fn domain(e: impl fmt::Display) -> Self {
        Error::Domain(e.to_string())
    }

    pub fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Position-carrying error from a JSON parse failure.
    pub fn json(path: impl fmt::Display, e: serde_json::Error) -> Self {
        Error::Malformed {
            path: path.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        }
    }
}

// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
