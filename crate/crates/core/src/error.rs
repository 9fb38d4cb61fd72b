use thiserror::Error;

/// Errors raised by warp evaluation, curve geometry, flow stepping and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("height {z} outside the domain (-inf, {upper})")]
    DomainExceeded { z: f64, upper: f64 },
    #[error("derivative of order {order} unavailable (max {max})")]
    OrderUnavailable { order: usize, max: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate edge {edge}: length {length:e}")]
    DegenerateEdge { edge: usize, length: f64 },
    #[error("curve does not close: closure offset / 2pi = {ratio}")]
    NotClosed { ratio: f64 },
    #[error("curve collapsed: length {length:e} below {threshold:e}")]
    Collapse { length: f64, threshold: f64 },
    #[error("resolution lost: max|kappa| * min ds = {value}")]
    Blowup { value: f64 },
    #[error("need {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("remesh inside diagnostic window")]
    RemeshInWindow,
    #[error("min angle function {min_theta} below {required}")]
    ThetaTooSmall { min_theta: f64, required: f64 },
    #[error("initial sandwich violated: {0}")]
    InitialOrderViolated(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
