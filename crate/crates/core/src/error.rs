use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("matrix is not symmetric/banded at entry ({row}, {col})")]
    NotBanded { row: usize, col: usize },

    #[error("singular factor at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("shifted system at node {node} is singular (pivot {pivot})")]
    SingularShiftedSystem { node: usize, pivot: usize },

    #[error("order {order} exceeds the dense eigendecomposition limit {limit}")]
    TooLargeForDense { order: usize, limit: usize },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("Bessel argument must be finite and non-negative, got {0}")]
    BadBesselArgument(f64),

    #[error("interval length does not divide the propagation window ({0} intervals)")]
    NonIntegralIntervals(f64),

    #[error("iteration matrix of order {order} exceeds the diagnostic cap {cap}")]
    DiagnosticTooLarge { order: usize, cap: usize },

    #[error("checkpoint {index} at t = {time} does not align with the oracle")]
    CheckpointMisaligned { index: usize, time: f64 },
}
