use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}: gap of {seconds} s between {from} and {to} exceeds the {window} s window")]
    Gap {
        path: PathBuf,
        from: String,
        to: String,
        seconds: i64,
        window: i64,
    },

    #[error("{path}:{line}: timestamp {timestamp} does not follow {previous}")]
    NonMonotone {
        path: PathBuf,
        line: u64,
        timestamp: String,
        previous: String,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: ctxnode_core::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn model(context: impl Into<String>) -> impl FnOnce(ctxnode_core::Error) -> Self {
        let context = context.into();
        move |source| Self::Model { context, source }
    }
}

/// Attaches `path` to a CSV error, keeping the line number of parse errors.
pub(crate) fn csv_error(path: &std::path::Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::Deserialize { err, .. } => Error::Parse {
            path: path.into(),
            line,
            message: err.to_string(),
        },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            path: path.into(),
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            path: path.into(),
            line,
            message: format!("{other:?}"),
        },
    }
}
