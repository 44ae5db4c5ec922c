use thiserror::Error;

/// Errors produced by the clustering library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments or data passed to an operation.
    #[error("input error: {0}")]
    Input(String),
    /// Malformed input file; `row` is 1-based and counts the header as row 1.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    /// Inconsistent or unusable run configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Short category name, used for exit codes and log lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) | Error::Csv(_) => "serialization",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
