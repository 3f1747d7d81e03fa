use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rank: n = {0} (need n >= 1)")]
    InvalidRank(usize),

    #[error("node {node} out of range for n = {n} (nodes are 1..={max})", max = .n.saturating_sub(1))]
    NodeOutOfRange { node: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Cartan vector is not trace-free (trace = {0:e})")]
    NotTraceFree(f64),

    #[error("invalid diagonal: {0}")]
    InvalidDiagonal(String),

    #[error("negative multiindex component at position {0}")]
    NegativeComponent(usize),

    #[error("matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("zero matrix has no radial projection")]
    ZeroMatrix,

    #[error("determinant {0:e} is not positive; matrix lies outside the identity component")]
    WrongComponent(f64),

    #[error("negative boundary coordinate tau[{index}] = {value:e}")]
    NegativeTau { index: usize, value: f64 },

    #[error("block {0} is singular")]
    SingularBlock(usize),

    #[error("invalid chart point: {0}")]
    InvalidChart(String),

    #[error(
        "Cartan vector lies outside the closed positive chamber (simple root {node} = {value:e})"
    )]
    OutsideChamber { node: usize, value: f64 },

    #[error("parabolics have different node subsets")]
    MismatchedSubsets,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate sample grid: {0}")]
    DegenerateGrid(String),

    #[error("unreliable slope fit: max residual {residual:e} exceeds {threshold:e}")]
    UnreliableFit { residual: f64, threshold: f64 },

    #[error("finite-difference step {step:e} too large for min tau {min_tau:e}")]
    StepTooLarge { step: f64, min_tau: f64 },

    #[error("invalid document: {0}")]
    InvalidDocument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
