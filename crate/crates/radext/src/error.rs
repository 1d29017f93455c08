use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        source: radext_core::Error,
    },
    #[error("{}: file is empty", path.display())]
    EmptyFile { path: PathBuf },
    #[error("{}: {message}", path.display())]
    Model { path: PathBuf, message: String },
    #[error("sentence mismatch between {} and {}: {message}", left.display(), right.display())]
    SentenceMismatch {
        left: PathBuf,
        right: PathBuf,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] radext_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs: a
    /// diverging loss, or model weights whose sums overflow.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Core(radext_core::Error::NonFiniteLoss(_) | radext_core::Error::NonFinite { .. })
                | Error::Invalid {
                    source: radext_core::Error::NonFiniteLoss(_),
                    ..
                }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
