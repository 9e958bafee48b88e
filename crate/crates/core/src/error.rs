use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degree {0} is too small for this construction")]
    DegreeTooSmall(usize),
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error("scaling undefined: {0}")]
    ScalingUndefined(String),
    #[error("coefficients share a common right kernel (col-stack rank {rank} < {n})")]
    CommonKernel { rank: usize, n: usize },
    #[error("invalid annihilator: {0}")]
    InvalidAnnihilator(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("DL pencil construction failed: {0}")]
    DlConstruction(String),
    #[error("invalid recurrence: {0}")]
    InvalidRecurrence(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("identity block deviates from I by {deviation:e}")]
    NotIdentityBlock { deviation: f64 },
    #[error("selected block is numerically singular (condition number {cond:e})")]
    SingularBlock { cond: f64 },
    #[error("no anchor with nonsingular evaluations found on the grid")]
    NoAnchor,
    #[error("singular pencil: {0}")]
    SingularPencil(String),
    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("singular polynomial: determinant vanishes identically")]
    SingularPolynomial,
    #[error("invalid problem configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
