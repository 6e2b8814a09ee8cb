//! Gauss curvature flow of smooth strictly convex bodies, described by
//! support functions on S¹ and S².
//!
//! * [`sphere`]: quadrature, spectral derivatives and interpolation;
//! * [`body`]: convex bodies, curvature data and static geometry;
//! * [`entropy`] and [`montecarlo`]: entropy functionals, distinguished points and their oracles;
//! * [`flow`]: time integration with runtime monitors;
//! * [`soliton`]: shrinking solitons and the functional `J₁`.

// Validity checks are written as `!(x > floor)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod corpus;
pub mod entropy;
pub mod error;
pub mod flow;
mod minimax;
pub mod montecarlo;
pub mod numeric;
pub mod shapes;
pub mod soliton;
pub mod sphere;

pub use body::{ConvexBody, CurvatureData, GeometrySummary};
pub use error::{GcfError, Result};
pub use sphere::{build_grid, Resolution, ScalarField, SphereGrid};
