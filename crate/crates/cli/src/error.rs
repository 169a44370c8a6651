use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing input: {0}")]
    MissingInput(PathBuf),

    #[error("{0}")]
    Physics(selfsim::Error),

    #[error("{0}")]
    Solver(selfsim::Error),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 runtime failure, 2 physics-domain error, 64 usage, 66 missing input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 64,
            CliError::MissingInput(_) => 66,
            CliError::Physics(_) => 2,
            CliError::Solver(_) | CliError::Verification(_) | CliError::Io { .. } => 1,
        }
    }

    /// Errors raised while setting up the physical problem.
    pub fn physics(e: selfsim::Error) -> Self {
        match e {
            selfsim::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Physics(other),
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingInput(path.to_path_buf())
        } else {
            CliError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}
