use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown level `{0}`")]
    UnknownLevel(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("enumeration over {p} vertices exceeds the cap of {cap}; raise the cap explicitly to proceed")]
    Capacity { p: usize, cap: usize },
    #[error("{levels} levels exceed the exact-enumeration limit of {limit}")]
    TooManyLevels { levels: usize, limit: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Numerical and generation failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Generation(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
