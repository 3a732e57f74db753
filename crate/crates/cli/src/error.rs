use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed data.
    Input(String),
    /// Invalid flags or configuration values.
    Config(String),
    /// The data defeat the estimators (non-positive or tied order statistics).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl From<dast_core::Error> for CliError {
    fn from(e: dast_core::Error) -> Self {
        use dast_core::Error as E;
        let msg = e.to_string();
        match e.root() {
            E::NonFinite { .. } | E::TooSmall { .. } => CliError::Input(msg),
            E::Domain { .. } | E::Tie { .. } | E::Study(_) => CliError::Numeric(msg),
            _ => CliError::Config(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
