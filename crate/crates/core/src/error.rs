use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix handed to the S₀³ representation was not symmetric/traceless.
    #[error("representation error: {0}")]
    Representation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge after {intervals} subintervals (error estimate {error:e})")]
    Quadrature { intervals: usize, error: f64 },

    #[error("singular least-squares design: {0}")]
    SingularFit(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value detected at step {step} (t = {t})")]
    Blowup { step: usize, t: f64 },

    #[error(transparent)]
    Config(#[from] crate::expcli::config::ConfigError),

    #[error(transparent)]
    Snapshot(#[from] crate::expcli::snapshot::SnapshotError),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
