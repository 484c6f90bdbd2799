//! Atomic, smeared, continuum and thorn potentials.

pub mod continuum;
pub mod orbital;
pub mod screening;
pub mod shape;
pub mod thorn;

pub use continuum::{build_continuum, build_continuum_with, ContinuumOptions, ContinuumPotential};
pub use orbital::OrbitalModel;
pub use screening::{atomic_potential, smeared_atomic_potential, ScreeningModel, YukawaTerm};
pub use shape::RadialShape;
pub use thorn::{
    projected_profile, thorn_electron_density, thorn_electron_potential, thorn_vib_potential,
    PhenomenologicalThorn, Thorn, ThornElectron, ThornPart, ThornVib,
};
