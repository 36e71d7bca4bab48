//! CLI failure classes and their exit codes.

use spectral_eta::Error;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration, or an input the pipeline
    /// cannot accept.
    Config(String),
    /// Missing or unreadable files.
    Io(String),
    /// A computation that could not be completed reliably.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "file error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidGrid(_)
            | Error::InvalidPotential(_)
            | Error::SchemeMismatch(_)
            | Error::NotCompactlySupported(_)
            | Error::NotProductNearCut(_)
            | Error::InvalidTheta(_)
            | Error::Incompatible(_)
            | Error::SupportTooSmall { .. }
            | Error::InvalidTime(_) => CliError::Config(msg),
            _ => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
