use thiserror::Error;

/// Errors produced by channel construction, inversion, simulation and
/// estimator assembly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} qubits, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid probability data: {0}")]
    InvalidProbability(String),

    #[error("channel is not invertible: PTM entry {entry:e} below threshold")]
    NonInvertibleChannel { entry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("shot budget too small: {0}")]
    ShotBudget(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid noise site: {0}")]
    InvalidSite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
