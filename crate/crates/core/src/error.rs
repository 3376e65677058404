use thiserror::Error;

use crate::ensemble::ValidationReport;
use crate::measurement::ConditionReport;

/// Errors raised by the discrimination toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |H - H^dagger| = {residual:e})")]
    NonHermitian { residual: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("count mismatch: ensemble has {states} states, POVM has {outcomes} outcomes")]
    CountMismatch { states: usize, outcomes: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("state is singular (min eigenvalue {min_eig:e} below rank tolerance)")]
    SingularState { min_eig: f64 },

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("block-orthogonal ensembles need dim >= m (dim {dim}, m {m})")]
    BlockTooSmall { dim: usize, m: usize },

    #[error("operation needs exactly 2 states, got {found}")]
    WrongStateCount { found: usize },

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error("orthogonality conditions fail (cond_i residual {:e}, cond_ii residual {:e})", .0.cond_i.residual, .0.cond_ii.residual)]
    ConditionsFail(Box<ConditionReport>),

    #[error("fixed-point iteration lost {drop:e} success probability at iteration {iteration}")]
    NoProgress { iteration: usize, drop: f64 },

    #[error("channel list is empty")]
    EmptyChannelList,

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
