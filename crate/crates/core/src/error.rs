use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A tagging record failed validation (empty field, empty tag after trimming).
    #[error("rejected record: {0}")]
    RejectedRecord(String),

    /// The tagging stream could not be read at all.
    #[error("failed to read tagging input at line {line}: {source}")]
    Ingest {
        line: usize,
        #[source]
        source: std::io::Error,
    },

    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("rate undefined: {0}")]
    UndefinedRate(&'static str),

    #[error("missing context: {0}")]
    MissingContext(&'static str),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            kind,
            id: id.into(),
        }
    }

    pub(crate) fn parse(
        origin: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }
}
