use thiserror::Error;

/// Error raised by the network DSL parser, with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid conservation spec: {0}")]
    InvalidConservation(String),

    #[error("slack offset u[{row}] = {u} is below the row maximum {required} of W·C")]
    OffsetTooSmall { row: usize, u: i64, required: i64 },

    #[error("initial state violates bound {row}: W·x0 = {value} > N = {bound}")]
    InitialOutOfBounds { row: usize, value: i64, bound: i64 },

    #[error("species `{0}` is not bounded by any conservation row or intrinsic conservation law")]
    UnboundedSpecies(String),

    #[error("state {0:?} is not in the state space")]
    StateNotFound(Vec<u32>),

    #[error("target set does not intersect the state space")]
    EmptyTarget,

    #[error("non-accessible target: {0}")]
    NonAccessibleTarget(String),

    #[error("positive-rate transition from {from:?} leaves the state space (to {to:?})")]
    TransitionLeavesSpace { from: Vec<u32>, to: Vec<i64> },

    #[error("{0} closed communication classes; pass the class to use explicitly")]
    AmbiguousClosedClass(usize),

    #[error("residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("distributions live on incomparable state spaces")]
    IncomparableSpaces,

    #[error("all {0} simulation runs were censored")]
    AllCensored(usize),

    #[error("Newton iteration did not converge (last residual {0:e})")]
    NewtonDiverged(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
