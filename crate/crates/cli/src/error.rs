use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Capability(String),
    #[error("test failed: {0}")]
    TestFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::TestFailed(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
            Self::Capability(_) => 3,
        }
    }
}

impl From<das_core::Error> for CliError {
    fn from(e: das_core::Error) -> Self {
        use das_core::Error as E;
        match e {
            E::UnsupportedRoute(_) | E::Resource(_) | E::Quadrature { .. } => Self::Capability(e.to_string()),
            E::Io(io) => Self::Io(io),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Config(e.to_string())
    }
}
