use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix dimension {dim} exceeds the supported maximum of {max}")]
    Capacity { dim: usize, max: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("operation annihilates the input state (output trace {weight:e})")]
    Annihilation { weight: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("endpoint singularity at alpha = {alpha}, delta = {delta}")]
    EndpointSingularity { alpha: f64, delta: f64 },

    #[error("no sign change of the stationarity residual for delta = {delta}; grid: {grid:?}")]
    RootNotFound { delta: f64, grid: Vec<(f64, f64)> },

    #[error("perturbation |x| = {magnitude} is infeasible: {reason}")]
    Infeasible { magnitude: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
