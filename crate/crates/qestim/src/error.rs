use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] qestim_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) | CliError::Core(qestim_core::Error::DegeneratePosterior) => {
                Self::NUMERICAL
            }
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
            _ => Self::USAGE,
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::File { path, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
