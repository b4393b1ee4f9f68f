use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}, row {row}, column {column}: {message}")]
    CsvCell {
        path: PathBuf,
        /// 1-based file line; the header is line 1.
        row: usize,
        column: String,
        message: String,
    },
    #[error("csv error in {path}: {message}")]
    CsvFormat { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cluster {cluster} has {size} rows, fewer than the required minimum {minimum}")]
    ClusterTooSmall {
        cluster: usize,
        size: usize,
        minimum: usize,
    },
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for config/validation problems the
    /// user can fix in their inputs, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidData(_)
            | Error::CsvCell { .. }
            | Error::CsvFormat { .. }
            | Error::DimensionMismatch { .. }
            | Error::ClusterTooSmall { .. }
            | Error::Json(_) => 2,
            Error::Io { .. } | Error::Singular(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
