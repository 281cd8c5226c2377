use std::path::PathBuf;

pub type IoResult<T> = Result<T, IoError>;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}:{line}: {field}: {message}")]
    Parse {
        origin: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("{origin}: {source}")]
    Invalid {
        origin: String,
        #[source]
        source: trajsup_core::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        origin: &str,
        line: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        IoError::Parse {
            origin: origin.to_owned(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(origin: &str, source: trajsup_core::Error) -> Self {
        IoError::Invalid {
            origin: origin.to_owned(),
            source,
        }
    }
}
