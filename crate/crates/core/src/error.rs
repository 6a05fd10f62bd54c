use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for a scale of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not regressive at point {index} (t = {t}): 1 + mu*p = {factor}")]
    Regressivity { index: usize, t: f64, factor: f64 },

    #[error("value overflows the scalar range at point {index} (t = {t})")]
    Overflow { index: usize, t: f64 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("instance {index}: {source}")]
    Instance { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    /// The error with any instance wrapping removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Instance { source, .. } => source.root(),
            e => e,
        }
    }
}
