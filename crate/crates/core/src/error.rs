use thiserror::Error;

/// Errors raised by the transform, mode and inversion routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("direction lies on the equator (rho = pi/2); use the equator limit instead")]
    EquatorUndefined,

    #[error("argument {value} lies outside the covered domain ({detail})")]
    Domain { value: f64, detail: String },

    #[error("profile carries no tail descriptor; refusing to truncate a semi-infinite integral")]
    MissingTail,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error(
        "quadrature refinement disagreement {estimate:e} exceeds tolerance {tol:e} (value {value})"
    )]
    Convergence { value: f64, estimate: f64, tol: f64 },

    #[error("field has no boundary function at infinity and is not declared vanishing")]
    MissingBoundaryData,

    #[error("null space is trivial for order {0}; generators exist only for orders >= 2")]
    NullSpaceEmpty(i64),

    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },

    #[error("Chebyshev kernel growth near x = 0 overwhelms mode {n} at t = {t} (inner/outer ratio {ratio:e})")]
    Singularity { n: i64, t: f64, ratio: f64 },

    #[error("input is declared odd; the dual transform is defined for even inputs only")]
    OddInput,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
