//! Numerical building blocks: adaptive quadrature, cubic splines and thin
//! wrappers over the special functions we need.

pub mod quad;
pub mod special;
pub mod spline;

pub use quad::{Estimate, Quadrature};
pub use spline::{CubicSpline, PeriodicSpline};
