use thiserror::Error;

/// Crate-wide error type.
///
/// `Resource` carries an optional rank bound so that a search interrupted by
/// its node budget can still report the best decomposition size it saw.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("resource limit: {context}")]
    Resource {
        context: String,
        best_rank: Option<usize>,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn resource(context: impl Into<String>) -> Self {
        Error::Resource {
            context: context.into(),
            best_rank: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
