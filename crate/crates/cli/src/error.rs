use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] llg_core::Error),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "CONFIG_PARSE",
            CliError::Invalid { .. } => "CONFIG_INVALID",
            CliError::Io { .. } => "IO",
            CliError::Core(e) => e.code(),
        }
    }

    /// `error code=<CODE> message="<text>"` on a single line.
    pub fn diagnostic(&self) -> String {
        let text = self.to_string().replace(['\n', '\r'], " ").replace('"', "'");
        format!("error code={} message=\"{}\"", self.code(), text)
    }
}
