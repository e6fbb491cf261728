use std::time::Duration;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (failed at pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("posterior variance {0:e} is negative beyond tolerance")]
    NegativeVariance(f64),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("every hyperparameter candidate failed to factorize (degenerate data)")]
    DegenerateData,

    #[error("point outside admissible region: {0}")]
    OutOfDomain(String),

    #[error("steady state did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("black-box protocol error: {0}")]
    Protocol(String),

    #[error("black-box evaluation timed out after {0:?}")]
    Timeout(Duration),

    #[error("black-box process exited: {0}")]
    ChildExited(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("record at step {0} carries no true values")]
    MissingTrueValues(usize),

    #[error("no feasible grid point found after {0} rejections")]
    NoFeasibleStart(usize),

    #[error("log replay diverged at step {0}")]
    ReplayMismatch(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
