use thiserror::Error;

/// Errors raised by the estimators, the sequential test and the simulation
/// harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("sample too small: need at least {min} observations, got {got}")]
    TooSmall { got: usize, min: usize },

    /// A logarithm would be taken of a non-positive order statistic.
    #[error(
        "non-positive order statistic at depth {depth} (value {value}); \
         largest admissible k is {max_k}"
    )]
    Domain {
        depth: usize,
        value: f64,
        max_k: usize,
    },

    /// Equal consecutive top order statistics make a statistic degenerate.
    #[error("tied order statistics at depth {depth}; dither the sample to break ties")]
    Tie { depth: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("at k={k}, k0={k0}: {source}")]
    Cell {
        k: usize,
        k0: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("study failed: {0}")]
    Study(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage and cell annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } | Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by the data (positivity, ties) rather than
    /// by the caller's arguments.
    pub fn is_numeric(&self) -> bool {
        matches!(self.root(), Error::Domain { .. } | Error::Tie { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
