use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("invalid value for `{key}` ({origin}): {message}")]
    Value { key: String, origin: String, message: String },
    #[error("{context}: {source}")]
    Numeric {
        context: &'static str,
        #[source]
        source: fracdelta::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches the module that produced a numerical error.
pub trait Context<T> {
    fn context(self, context: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for fracdelta::Result<T> {
    fn context(self, context: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Numeric { context, source })
    }
}
