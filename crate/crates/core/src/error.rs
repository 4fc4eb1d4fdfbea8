use thiserror::Error;

use crate::prob::Joint3;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel matrix: {0}")]
    InvalidChannel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("refused: {0}")]
    Refused(String),

    /// An iterative method hit its iteration cap. `best` holds the last
    /// iterate when one exists.
    #[error("no convergence after {iterations} iterations (residual {residual:e}): {detail}")]
    Convergence {
        iterations: usize,
        residual: f64,
        detail: String,
        best: Option<Box<Joint3>>,
    },

    /// Root finding on the Lagrange multiplier lost its bracket.
    #[error("bracket failure on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e}): {detail}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
