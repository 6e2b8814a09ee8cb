use thiserror::Error;

pub type Result<T, E = GcfError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GcfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field lives on a different grid than the operation")]
    GridMismatch,

    #[error("support function not positive: u = {value:e} at node {node}")]
    Positivity { node: usize, value: f64 },

    #[error("strict convexity violated: min eigenvalue of A = {eigenvalue:e} at node {node}")]
    Convexity { node: usize, eigenvalue: f64 },

    #[error("shape is under-resolved on this grid: spectral tail {tail:e} exceeds {limit:e}")]
    UnderResolved { tail: f64, limit: f64 },

    #[error("{method} did not converge in {iterations} iterations (gradient norm {gradient_norm:e}, last iterate {last:?})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        gradient_norm: f64,
        last: Vec<f64>,
    },

    #[error("monte carlo estimate unavailable: {0}")]
    Statistical(String),

    #[error("step rejected: {0}")]
    StepRejected(Box<GcfError>),

    #[error("time step underflow at t = {t}: dt = {dt:e} ({reason})")]
    Stiffness { t: f64, dt: f64, reason: String },

    #[error("not enough trace rows: need {needed}, have {have}")]
    InsufficientData { needed: usize, have: usize },
}

impl GcfError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        GcfError::InvalidParameter(msg.into())
    }
}
