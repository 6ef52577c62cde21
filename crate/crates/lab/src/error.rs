use std::path::PathBuf;

/// Everything a command can fail with. [`LabError::exit_code`] maps these
/// onto the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] wavegauge_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad configuration, 1 for everything that went wrong while
    /// running.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
