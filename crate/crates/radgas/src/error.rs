use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadgasError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field size {got} does not match grid ({expected} points)")]
    SizeMismatch { got: usize, expected: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("solution blew up (non-finite state) at t = {t}")]
    BlowUp { t: f64 },
    #[error("wall-time budget of {budget_s} s exceeded at t = {t}")]
    WallTimeExceeded { t: f64, budget_s: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RadgasError>;
