use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial of degree {0} has no roots to find")]
    DegreeTooLow(isize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix must be square with n >= 1 (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("vector `{0}` must be nonzero")]
    ZeroVector(&'static str),
    #[error("matrix of size {n} exceeds the oracle limit {max}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("eigenvalue oracle failed to converge")]
    OracleFailed,
    #[error("p_uv routes disagree: relative gap {gap:.3e} exceeds {tol:.1e}")]
    PuvCrossCheck { gap: f64, tol: f64 },
    #[error("point {0} lies on a pole of Q")]
    AtPole(String),
    #[error("point {0} is too close to the spectrum of A")]
    NearSpectrum(String),
    #[error("companion coefficients must all be nonzero (a[{0}] = 0)")]
    ZeroCoefficient(usize),
    #[error("inputs must be real: {0}")]
    NotReal(&'static str),
    #[error("structure violation: {0}")]
    Structure(String),
    #[error("asymptotic model is degenerate: p_uv vanishes identically")]
    Degenerate,
    #[error("|tau| = {got:.3e} is below the asymptotic threshold {min:.3e}")]
    TauTooSmall { got: f64, min: f64 },
    #[error("prediction matching failed: {0}")]
    Matching(String),
    #[error("matrix has a negative or non-real entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("matrix is reducible")]
    Reducible,
    #[error("no path from {from} back to {to}")]
    NoPath { from: usize, to: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
