use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: profile sampled on {profile}, grid is {grid}")]
    GridMismatch { profile: String, grid: String },
    #[error("non-integrable singularity: {0}")]
    NonIntegrable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("trivial profile: {0}")]
    TrivialProfile(String),
    #[error("no extremal exists for s = 0 and mu = {mu} < 0 (the infimum is not attained)")]
    NoExtremal { mu: f64 },
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("shooting failed at r = {r:.6e}: {reason}")]
    ShootingFailed { r: f64, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
