use thiserror::Error;

use crate::metric::PointId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {id} out of range for space of {n} points")]
    OutOfRange { id: usize, n: usize },

    #[error("graph is disconnected: no path between {u} and {v}")]
    Disconnected { u: PointId, v: PointId },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Whether the error stems from bad user input rather than an internal fault.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::OutOfRange { .. }
                | Error::Disconnected { .. }
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
