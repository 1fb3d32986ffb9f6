use thiserror::Error;

/// Errors produced by the numerical routines and exact solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid survival grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cutoff {cutoff} too small: tail exp(-cutoff^d) = {tail:e} exceeds tolerance {tol:e}")]
    CutoffTooSmall { cutoff: f64, tail: f64, tol: f64 },

    #[error("beta not monotone in theta: beta({theta_prev}) = {prev} > beta({theta}) = {next}")]
    NonMonotoneBeta {
        theta_prev: f64,
        prev: f64,
        theta: f64,
        next: f64,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("root bracketing failed: {0}")]
    RootBracket(String),

    #[error("instance too large for exact solve: {0}")]
    TooLarge(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("graph is not a tree rooted at the start vertex")]
    NotATree,

    #[error("unsupported capacities: {0}")]
    Capacity(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("expected cluster size {expected:e} exceeds the cap {cap:e}")]
    ClusterTooLarge { expected: f64, cap: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
