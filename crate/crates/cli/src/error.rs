use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure in {op}: {source}")]
    Numeric { op: &'static str, source: zerolab::Error },

    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv error on {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("json error on {}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io { .. } | CliError::Csv { .. } | CliError::Json { .. } => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attach the name of the library operation to a failure. Rejected arguments
/// are configuration errors; everything else is numeric.
pub trait During<T> {
    fn during(self, op: &'static str) -> CliResult<T>;
}

impl<T> During<T> for zerolab::Result<T> {
    fn during(self, op: &'static str) -> CliResult<T> {
        self.map_err(|e| match e {
            zerolab::Error::InvalidArgument(msg) => CliError::Config(format!("{op}: {msg}")),
            source => CliError::Numeric { op, source },
        })
    }
}
