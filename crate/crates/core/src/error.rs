use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at grid index ({0}, {1}, {2})")]
    NonFinite(usize, usize, usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("continuation parameter {0} is outside [0, 1]")]
    TauOutOfRange(f64),

    #[error("Krylov iteration stalled after {iterations} iterations (relative residual {relative_residual:e})")]
    KrylovStalled {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("Newton iteration did not converge in {iterations} steps (residual sup {residual:e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    #[error("line search found no acceptable step (residual sup {residual:e})")]
    LineSearchFailed { residual: f64 },

    #[error("iterate left the elliptic set: min(u_xx+1) = {min_q:e}, min(u_yy+u_tt+u_t+1) = {min_p:e}")]
    EllipticityLost { min_p: f64, min_q: f64 },

    #[error("datum is not normalized: integral of e^F is {integral} but the box volume is {volume} (use renormalize)")]
    Normalization { integral: f64, volume: f64 },

    #[error("continuation stalled at tau = {tau} (step {step:e} below the floor)")]
    ContinuationStalled { tau: f64, step: f64 },

    #[error("manufactured left-hand side is not positive: minimum {min} at grid index {index:?}")]
    NonPositiveLhs {
        min: f64,
        index: (usize, usize, usize),
    },

    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
