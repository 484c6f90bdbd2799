//! Crystal, beam and particle descriptions shared by every other module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::ContinuumPotential;
use crate::units::{ev_to_mev, ELECTRON_MASS};

/// Silicon lattice constant, nm.
pub const SI_LATTICE_NM: f64 = 0.543_102;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelGeometry {
    /// Atomic planes normal to x, spaced `spacing_nm` apart, the first at x = 0.
    Planar {
        miller: [i32; 3],
        spacing_nm: f64,
        areal_density_nm2: f64,
    },
    /// Atomic strings parallel to z. String positions are given inside a
    /// rectangular transverse cell that tiles the plane; atoms repeat along
    /// each string every `period_nm`.
    Axial {
        direction: [i32; 3],
        cell_nm: [f64; 2],
        strings_nm: Vec<[f64; 2]>,
        period_nm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalModel {
    pub name: String,
    pub z: u32,
    pub lattice_constant_nm: f64,
    pub geometry: ChannelGeometry,
    /// One-dimensional rms thermal displacement.
    pub u1_nm: f64,
    /// Thomas–Fermi screening radius.
    pub a_tf_nm: f64,
    /// Nuclear radius, the inner regulator of the Coulomb peak.
    pub r_n_nm: f64,
    /// Channel potential depth; derived from the continuum potential when absent.
    #[serde(default)]
    pub u0_ev: Option<f64>,
}

impl CrystalModel {
    /// Si (110) planar channel.
    pub fn si_110() -> Self {
        let a = SI_LATTICE_NM;
        let spacing = a / 8f64.sqrt();
        CrystalModel {
            name: "Si(110)".into(),
            z: 14,
            lattice_constant_nm: a,
            geometry: ChannelGeometry::Planar {
                miller: [1, 1, 0],
                spacing_nm: spacing,
                areal_density_nm2: 8.0 / (a * a * a) * spacing,
            },
            u1_nm: 0.0075,
            a_tf_nm: 0.0194,
            r_n_nm: 3.0e-6,
            u0_ev: None,
        }
    }

    /// Si <100> axial channel: strings on the (i + j even) sites of an a/4
    /// square net, one atom per lattice constant along each string.
    pub fn si_100_axial() -> Self {
        let a = SI_LATTICE_NM;
        CrystalModel {
            name: "Si<100>".into(),
            geometry: ChannelGeometry::Axial {
                direction: [1, 0, 0],
                cell_nm: [0.5 * a, 0.5 * a],
                strings_nm: vec![[0.0, 0.0], [0.25 * a, 0.25 * a]],
                period_nm: a,
            },
            ..Self::si_110()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "Si" | "Si(110)" | "Si110" => Ok(Self::si_110()),
            "Si<100>" | "Si100-axial" => Ok(Self::si_100_axial()),
            other => Err(Error::config("crystal.preset", format!("unknown preset `{other}`"))),
        }
    }

    /// Distance between neighbouring planes, or between nearest strings.
    pub fn channel_spacing_nm(&self) -> f64 {
        match &self.geometry {
            ChannelGeometry::Planar { spacing_nm, .. } => *spacing_nm,
            ChannelGeometry::Axial {
                cell_nm, strings_nm, ..
            } => {
                let mut best = cell_nm[0].min(cell_nm[1]);
                for (i, a) in strings_nm.iter().enumerate() {
                    for b in &strings_nm[i + 1..] {
                        for sx in [-1.0, 0.0, 1.0] {
                            for sy in [-1.0, 0.0, 1.0] {
                                let dx = b[0] - a[0] + sx * cell_nm[0];
                                let dy = b[1] - a[1] + sy * cell_nm[1];
                                best = best.min((dx * dx + dy * dy).sqrt());
                            }
                        }
                    }
                }
                best
            }
        }
    }

    /// Volume number density of atoms, nm^-3.
    pub fn atom_density_nm3(&self) -> f64 {
        match &self.geometry {
            ChannelGeometry::Planar {
                spacing_nm,
                areal_density_nm2,
                ..
            } => areal_density_nm2 / spacing_nm,
            ChannelGeometry::Axial {
                cell_nm,
                strings_nm,
                period_nm,
                ..
            } => strings_nm.len() as f64 / (cell_nm[0] * cell_nm[1] * period_nm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.z == 0 {
            return Err(Error::config("crystal.z", "atomic number must be >= 1"));
        }
        let lengths = [
            ("crystal.lattice_constant_nm", self.lattice_constant_nm),
            ("crystal.u1_nm", self.u1_nm),
            ("crystal.a_tf_nm", self.a_tf_nm),
            ("crystal.r_n_nm", self.r_n_nm),
        ];
        for (key, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be a positive length, got {v}")));
            }
        }
        match &self.geometry {
            ChannelGeometry::Planar {
                spacing_nm,
                areal_density_nm2,
                ..
            } => {
                if !(*spacing_nm > 0.0 && *areal_density_nm2 > 0.0) {
                    return Err(Error::config(
                        "crystal.geometry.planar",
                        "spacing and areal density must be positive",
                    ));
                }
            }
            ChannelGeometry::Axial {
                cell_nm,
                strings_nm,
                period_nm,
                ..
            } => {
                if !(cell_nm[0] > 0.0 && cell_nm[1] > 0.0 && *period_nm > 0.0) || strings_nm.is_empty() {
                    return Err(Error::config(
                        "crystal.geometry.axial",
                        "cell, period and string list must be non-empty and positive",
                    ));
                }
            }
        }
        if let Some(u0) = self.u0_ev {
            if !(u0.is_finite() && u0 >= 0.0) {
                return Err(Error::config("crystal.u0_ev", "must be non-negative"));
            }
        }
        let d = self.channel_spacing_nm();
        if !(self.r_n_nm < self.u1_nm) {
            return Err(Error::ScaleHierarchy(format!(
                "r_N = {} nm is not below u1 = {} nm",
                self.r_n_nm, self.u1_nm
            )));
        }
        if !(self.u1_nm < self.a_tf_nm) {
            return Err(Error::ScaleHierarchy(format!(
                "u1 = {} nm is not below a_TF = {} nm",
                self.u1_nm, self.a_tf_nm
            )));
        }
        if !(self.a_tf_nm < d) {
            return Err(Error::ScaleHierarchy(format!(
                "a_TF = {} nm is not below the channel spacing {} nm",
                self.a_tf_nm, d
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Particle {
    Electron,
    Positron,
}

impl Particle {
    pub fn mass_mev(self) -> f64 {
        ELECTRON_MASS
    }

    pub fn charge_sign(self) -> i8 {
        match self {
            Particle::Electron => -1,
            Particle::Positron => 1,
        }
    }
}

/// Relativistic projectile state. z is the channel direction; for planar
/// channels x is normal to the planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub energy: f64,
    pub momentum: [f64; 3],
    pub position: [f64; 3],
    pub charge_sign: i8,
    pub mass: f64,
}

impl ParticleState {
    /// Builds a state moving along +z with the given transverse momentum;
    /// the longitudinal component is fixed by the mass shell.
    pub fn new(energy: f64, mass: f64, charge_sign: i8, position: [f64; 3], p_t: [f64; 2]) -> Result<Self> {
        if !(energy.is_finite() && mass >= 0.0 && energy > mass) {
            return Err(Error::domain(format!(
                "particle must be moving: E = {energy} MeV, m = {mass} MeV"
            )));
        }
        if charge_sign != 1 && charge_sign != -1 {
            return Err(Error::domain("charge sign must be +1 or -1"));
        }
        let mut s = ParticleState {
            energy,
            momentum: [0.0, 0.0, 0.0],
            position,
            charge_sign,
            mass,
        };
        s.set_transverse_momentum(p_t)?;
        Ok(s)
    }

    pub fn for_particle(particle: Particle, energy: f64, position: [f64; 3], p_t: [f64; 2]) -> Result<Self> {
        Self::new(energy, particle.mass_mev(), particle.charge_sign(), position, p_t)
    }

    #[inline]
    pub fn depth(&self) -> f64 {
        self.position[2]
    }

    #[inline]
    pub fn transverse_momentum(&self) -> [f64; 2] {
        [self.momentum[0], self.momentum[1]]
    }

    #[inline]
    pub fn transverse_position(&self) -> [f64; 2] {
        [self.position[0], self.position[1]]
    }

    /// Replace the transverse momentum keeping E fixed (frozen scatterers do
    /// not absorb energy); p_z follows from the mass shell.
    pub fn set_transverse_momentum(&mut self, p_t: [f64; 2]) -> Result<()> {
        let p2 = self.energy * self.energy - self.mass * self.mass;
        let pt2 = p_t[0] * p_t[0] + p_t[1] * p_t[1];
        if pt2 >= p2 {
            return Err(Error::domain("transverse momentum exceeds total momentum"));
        }
        self.momentum = [p_t[0], p_t[1], (p2 - pt2).sqrt()];
        Ok(())
    }

    /// |E^2 - p^2 - m^2| / E^2.
    pub fn mass_shell_residual(&self) -> f64 {
        let p2: f64 = self.momentum.iter().map(|v| v * v).sum();
        (self.energy * self.energy - p2 - self.mass * self.mass).abs() / (self.energy * self.energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntryDistribution {
    /// Enter exactly at the minimum of the particle's potential energy.
    Delta,
    /// Uniform over one channel period (planar) or one transverse cell (axial).
    Uniform,
    /// Gaussian around the potential minimum.
    Gaussian { sigma_nm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub particle: Particle,
    #[serde(rename = "E_MeV")]
    pub energy_mev: f64,
    #[serde(default)]
    pub entry_angle_mrad: f64,
    #[serde(default = "default_entry")]
    pub entry: EntryDistribution,
}

fn default_entry() -> EntryDistribution {
    EntryDistribution::Uniform
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_mev.is_finite() && self.energy_mev > self.particle.mass_mev()) {
            return Err(Error::config("beam.E_MeV", "energy must exceed the rest mass"));
        }
        if !self.entry_angle_mrad.is_finite() {
            return Err(Error::config("beam.entry_angle_mrad", "must be finite"));
        }
        if let EntryDistribution::Gaussian { sigma_nm } = self.entry {
            if !(sigma_nm > 0.0 && sigma_nm.is_finite()) {
                return Err(Error::config("beam.entry.sigma_nm", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalParameters {
    pub psi_c_mrad: f64,
    pub q_c_mev: f64,
}

/// Lindhard critical angle and critical transverse momentum
/// `q_c = sqrt(2 E U0)`, `psi_c = q_c / E`.
pub fn critical_from_depth(u0_ev: f64, energy_mev: f64) -> Result<CriticalParameters> {
    if !(energy_mev.is_finite() && energy_mev > 0.0) {
        return Err(Error::domain(format!("energy must be positive, got {energy_mev}")));
    }
    if !(u0_ev.is_finite() && u0_ev >= 0.0) {
        return Err(Error::domain(format!("potential depth must be non-negative, got {u0_ev}")));
    }
    let q_c = (2.0 * energy_mev * ev_to_mev(u0_ev)).sqrt();
    Ok(CriticalParameters {
        psi_c_mrad: 1.0e3 * q_c / energy_mev,
        q_c_mev: q_c,
    })
}

/// Critical parameters using the crystal's configured depth U0.
pub fn critical_parameters(crystal: &CrystalModel, energy_mev: f64) -> Result<CriticalParameters> {
    let u0 = crystal
        .u0_ev
        .ok_or_else(|| Error::domain("crystal has no U0; build the continuum potential first"))?;
    critical_from_depth(u0, energy_mev)
}

/// Transverse energy in eV, measured from the minimum of the particle's
/// potential energy. For planar channels only p_x enters.
pub fn transverse_energy(state: &ParticleState, v_lin: &ContinuumPotential) -> Result<f64> {
    let x = state.transverse_position();
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::OutOfDomain { x_nm: x[0] });
    }
    let p = state.transverse_momentum();
    let kinetic = if v_lin.is_planar() {
        p[0] * p[0]
    } else {
        p[0] * p[0] + p[1] * p[1]
    } / (2.0 * state.energy);
    Ok(crate::units::mev_to_ev(kinetic) + v_lin.potential_energy_ev(x, state.charge_sign))
}
