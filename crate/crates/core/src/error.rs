use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error("target column `{0}` not found")]
    TargetNotFound(String),

    #[error("column `{0}` has no non-missing values")]
    ColumnEntirelyMissing(String),

    #[error("dataset has zero rows")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("AUC undefined: only one class present")]
    AucUndefined,

    #[error("configuration error for {algorithm}: {message}")]
    Config { algorithm: String, message: String },

    #[error("training {algorithm} failed: {message}")]
    Training { algorithm: String, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("stage `{stage}` failed{}: {source}", dataset.as_ref().map(|d| format!(" on dataset `{d}`")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        dataset: Option<String>,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported artifact version {0}")]
    UnsupportedVersion(u64),

    #[error("artifact checksum failed: {0}")]
    Checksum(String),

    #[error("portfolio fingerprint mismatch: artifact {artifact}, live {live}")]
    FingerprintMismatch { artifact: String, live: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn stage(stage: &'static str, dataset: Option<&str>, source: Error) -> Self {
        Error::Stage {
            stage,
            dataset: dataset.map(str::to_owned),
            source: Box::new(source),
        }
    }

    /// True when the error originates from bad input data rather than misuse.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
