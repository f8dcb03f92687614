use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid interval [{start}, {end}]: start must be strictly before end")]
    InvalidInterval { start: f64, end: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("out of range: {0}")]
    Range(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("scenario generation failed: {0}")]
    Generation(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("clip scorer failed for view {view} at start frame {start}: {source}")]
    Scorer {
        view: usize,
        start: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors that indicate a broken internal invariant rather than
    /// bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Contract(_))
    }
}
