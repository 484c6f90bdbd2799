//! Born and eikonal cross sections of thorns, their moments, and the
//! single-collision dechanneling estimate.

pub mod born;
pub mod classical;
pub mod dech;
pub mod fig2;
pub mod formfactor;
pub mod sumrules;
pub mod table;

pub use born::{
    born_dsigma_atom, born_dsigma_electron, born_dsigma_generic, sigma_atom_total, sigma_atom_window,
    sigma_electron_window, FourierRoute, KWindow,
    atom_table, electron_table, electron_table_smoothed,
};
pub use formfactor::{FormFactorModel, Shell};
pub use table::{rotate, DifferentialXS, QGrid, ThornDescriptor};
