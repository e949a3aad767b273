use thiserror::Error;

/// Errors produced by samplers, oracles and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("unsupported route: {0}")]
    UnsupportedRoute(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("quadrature error estimate {estimate:.3e} exceeds requested precision {requested:.3e} on a {grid}x{grid} grid")]
    Quadrature {
        estimate: f64,
        requested: f64,
        grid: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
