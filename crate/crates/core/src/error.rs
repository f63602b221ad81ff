use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("point ({x}, {y}) outside the domain [0, {length}]")]
    Domain { x: f64, y: f64, length: f64 },

    #[error("diagonal side unspecified at x = y = {0}")]
    DiagonalSideUnspecified(f64),

    #[error("lattice range overflow: {cells} cells requested")]
    LatticeOverflow { cells: f64 },

    #[error("mesh mismatch: expected {expected} nodes, got {got}")]
    MeshMismatch { expected: usize, got: usize },

    #[error("indefinite operator: non-positive pivot {pivot} at row {row}")]
    IndefiniteOperator { row: usize, pivot: f64 },

    #[error("coefficient not uniformly elliptic: 1/a = {value} at node {node}")]
    NotElliptic { node: usize, value: f64 },

    #[error(
        "fixed-point iteration did not converge after {iterations} steps \
         (residual {residual:e}, norm estimate {norm_estimate})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        norm_estimate: f64,
    },

    #[error("eigensolver failed for pair {index}: residual {residual:e} (matrix order {order})")]
    Eigensolver {
        index: usize,
        residual: f64,
        order: usize,
    },

    #[error("quadrature did not converge at rho = {rho}: error estimate {estimate:e}")]
    Quadrature { rho: f64, estimate: f64 },

    #[error("degenerate sample: zero variance")]
    DegenerateSample,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("non-positive value {value} at position {index} in log-log fit")]
    NonPositive { index: usize, value: f64 },

    #[error("diagonal coefficient is second order (n = m = {0})")]
    DiagonalCoefficient(usize),

    #[error("{failed} of {total} realizations failed (first failing seed {first_seed})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first_seed: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
