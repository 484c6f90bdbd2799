//! Channeling Monte Carlo with two treatments of incoherent scattering: a
//! classical binary-collision model on instantaneous atom and electron
//! positions, and a semi-classical model in which continuum trajectories are
//! interrupted by momentum kinks drawn from Born cross sections of thorns.

pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod potentials;
pub mod sampler;
pub mod transport;
pub mod units;
pub mod xsection;

pub use error::{Error, Result};
