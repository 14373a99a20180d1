use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range. `field` is a dotted path.
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("config parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("trajectory ({init_index}, {noise_index}) failed: {source}")]
    Trajectory {
        init_index: u64,
        noise_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("no record at t = {0}")]
    UnrecordedTime(f64),

    #[error("no position snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("refusing to overwrite non-empty output directory {0} (pass --force)")]
    OutputExists(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Prefixes the field path of an `Invalid` error, e.g. `kappa` becomes
    /// `params.kappa`.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::Invalid { field, reason } => Error::Invalid { field: format!("{prefix}.{field}"), reason },
            other => other,
        }
    }

    /// True for errors caused by the user's configuration rather than by the
    /// run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Invalid { .. } | Error::Parse { .. } | Error::UnknownScenario(_) | Error::OutputExists(_))
    }
}
