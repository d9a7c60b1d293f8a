use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Lengths or counts that do not fit together.
    #[error("size error: {0}")]
    Size(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degenerate LFSR state: seed must be nonzero")]
    DegenerateState,

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("range error: {0}")]
    Range(String),

    /// The path searcher found no peak above the noise floor.
    #[error("no lock: no correlation peak above the noise floor")]
    NoLock,

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Every violated field of a scenario, one entry each.
    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Whether the error stems from invalid input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Config(_) | Error::Json(_) | Error::Geometry(_)
        )
    }
}
