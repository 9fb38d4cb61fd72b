//! Numerical laboratory for the curve shortening flow on warped-product
//! surfaces `S¹ × (-∞, a)` with metric `r(z)^2 dθ² + dz²`.
//!
//! The crate is generic over the floating point type (see [`Scalar`]); the
//! aliases at the root fix it to `f64`, which is what the CLI and file formats use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod scalar;
pub mod stencil;
pub mod warp;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Warp = warp::WarpingFunction<f64>;
pub type Curve = curve::DiscreteCurve<f64>;
pub type Geometry = curve::CurveGeometry<f64>;
pub type State = flow::FlowState<f64>;
pub type Params = flow::SolverParams<f64>;
pub type Trajectory = flow::Trajectory<f64>;
pub type Record = diagnostics::DiagnosticsRecord<f64>;
