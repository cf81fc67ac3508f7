use thiserror::Error;

/// Errors raised by the holonomy toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("undefined phase: |z| = {modulus:.3e} is below the floor {floor:.1e}")]
    UndefinedPhase { modulus: f64, floor: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("sequence is not admissible: link {link} does not fully overlap (rank {rank} of {dim})")]
    Inadmissible { link: usize, rank: usize, dim: usize },

    #[error("angle constraint violated: {0}")]
    AngleConstraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dim} exceeds the simulation cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
