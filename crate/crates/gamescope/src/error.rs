use std::path::PathBuf;

use gamescope_core::Error as CoreError;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("format: {0}")]
    Format(String),
    #[error("numeric: {0}")]
    Numeric(CoreError),
    #[error("convergence: {0}")]
    Convergence(CoreError),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl AppError {
    /// Process exit code. `0` is success and `1` is reserved for IO failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } => 1,
            AppError::Usage(_) => 2,
            AppError::Format(_) => 3,
            AppError::Numeric(_) => 4,
            AppError::Convergence(_) => 5,
            AppError::Divergence(_) => 6,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }

    pub fn format(msg: impl Into<String>) -> Self {
        AppError::Format(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Argument(m) => AppError::Usage(m),
            CoreError::Shape(m) => AppError::Format(m),
            e @ CoreError::Convergence { .. } => AppError::Convergence(e),
            e => AppError::Numeric(e),
        }
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Format(e.to_string())
    }
}
