use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error("integration failed at t = {t} μs: {reason}")]
    Integration { t: f64, reason: String },

    #[error("pulse search failed (best residual {best_residual:.3e})")]
    SearchFailed { best_residual: f64 },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed event store: {0}")]
    MalformedStore(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
