//! Immersed elastic interface in periodic Stokes flow: spectral fluid
//! solvers, interface geometry in arclength/tangent-angle form, explicit
//! and semi-implicit time integrators, and diagnostics.

// NaN must fail every positivity check, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod bessel;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod integrators;
pub mod linalg;
pub mod nondim;
pub mod sim;
pub mod spectral;
pub mod stokes;

pub use error::{Error, Result};
