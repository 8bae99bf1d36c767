use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    /// rho11 left [0, 1] by more than the clamping tolerance; dt is too large.
    #[error("step overflow at step {step} (t = {t}): rho11 = {rho11}")]
    StepOverflow { step: usize, t: f64, rho11: f64 },

    #[error("time mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("empty ensemble")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;
