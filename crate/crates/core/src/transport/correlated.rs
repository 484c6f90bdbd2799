//! Correlated thermal vibrations: phonons longer than a cutoff wavelength
//! form a smooth displacement field shared by neighbouring atoms, the rest
//! stays independent per site.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CrystalModel;
use crate::potentials::orbital::isotropic_direction;

const PI: f64 = std::f64::consts::PI;
const MODES_PER_AXIS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononCorrelationModel {
    pub lambda_c_nm: f64,
    /// rms per axis of the long-wavelength field.
    pub u_long_nm: f64,
    /// rms per axis of the independent site noise.
    pub u_short_nm: f64,
}

/// Debye wave number (6 pi^2 n)^(1/3), nm^-1.
pub fn debye_wavenumber(crystal: &CrystalModel) -> f64 {
    (6.0 * PI * PI * crystal.atom_density_nm3()).cbrt()
}

impl PhononCorrelationModel {
    /// Equal variance per mode on a Debye spectrum puts the fraction
    /// k_c / k_D of the displacement variance into wavelengths above
    /// lambda_c = 2 pi / k_c.
    pub fn new(crystal: &CrystalModel, lambda_c_nm: f64) -> Result<Self> {
        if !(lambda_c_nm > crystal.lattice_constant_nm) {
            return Err(Error::domain(format!(
                "cutoff wavelength {lambda_c_nm} nm must exceed the lattice constant {} nm",
                crystal.lattice_constant_nm
            )));
        }
        let u1 = crystal.u1_nm;
        let frac = if lambda_c_nm.is_infinite() {
            0.0
        } else {
            (2.0 * PI / lambda_c_nm / debye_wavenumber(crystal)).min(1.0)
        };
        Ok(Self {
            lambda_c_nm,
            u_long_nm: u1 * frac.sqrt(),
            u_short_nm: u1 * (1.0 - frac).sqrt(),
        })
    }

    pub fn cutoff_wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda_c_nm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode {
    k: [f64; 3],
    axis: usize,
    phase: f64,
}

/// One realisation of the long-wavelength field plus the short-wavelength width.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    model: PhononCorrelationModel,
    modes: Vec<Mode>,
    amplitude: f64,
}

/// Draws a field of random long-wavelength modes: wave numbers uniform up to
/// k_c, isotropic directions, polarisations cycling over the three axes.
pub fn correlated_displacement_field<R: Rng + ?Sized>(
    crystal: &CrystalModel,
    lambda_c_nm: f64,
    rng: &mut R,
) -> Result<DisplacementField> {
    let model = PhononCorrelationModel::new(crystal, lambda_c_nm)?;
    Ok(DisplacementField::draw(model, rng))
}

impl DisplacementField {
    pub fn draw<R: Rng + ?Sized>(model: PhononCorrelationModel, rng: &mut R) -> Self {
        let n = 3 * MODES_PER_AXIS;
        let kc = if model.lambda_c_nm.is_finite() { model.cutoff_wavenumber() } else { 0.0 };
        let modes = (0..n)
            .map(|i| {
                let kmag = kc * rng.gen::<f64>();
                let d = isotropic_direction(rng);
                Mode {
                    k: [kmag * d[0], kmag * d[1], kmag * d[2]],
                    axis: i % 3,
                    phase: 2.0 * PI * rng.gen::<f64>(),
                }
            })
            .collect();
        // each axis carries n/3 modes of variance A^2/2
        let amplitude = model.u_long_nm * (6.0 / n as f64).sqrt();
        Self { model, modes, amplitude }
    }

    pub fn model(&self) -> &PhononCorrelationModel {
        &self.model
    }

    /// Long-wavelength displacement at r.
    pub fn long(&self, r: [f64; 3]) -> [f64; 3] {
        let mut u = [0.0; 3];
        if self.amplitude == 0.0 {
            return u;
        }
        for m in &self.modes {
            let arg = m.k[0] * r[0] + m.k[1] * r[1] + m.k[2] * r[2] + m.phase;
            u[m.axis] += self.amplitude * arg.cos();
        }
        u
    }

    /// First and second z-derivatives of the long field at r.
    pub fn long_z_derivatives(&self, r: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let mut d1 = [0.0; 3];
        let mut d2 = [0.0; 3];
        if self.amplitude == 0.0 {
            return (d1, d2);
        }
        for m in &self.modes {
            let arg = m.k[0] * r[0] + m.k[1] * r[1] + m.k[2] * r[2] + m.phase;
            d1[m.axis] -= self.amplitude * m.k[2] * arg.sin();
            d2[m.axis] -= self.amplitude * m.k[2] * m.k[2] * arg.cos();
        }
        (d1, d2)
    }

    /// Instantaneous displacement of the atom whose mean site is `site`.
    pub fn site_displacement<R: Rng + ?Sized>(&self, site: [f64; 3], rng: &mut R) -> [f64; 3] {
        let l = self.long(site);
        let s = self.model.u_short_nm;
        [
            l[0] + s * rng.sample::<f64, _>(StandardNormal),
            l[1] + s * rng.sample::<f64, _>(StandardNormal),
            l[2] + s * rng.sample::<f64, _>(StandardNormal),
        ]
    }

    /// Radius of curvature of the displaced centre line along z at r, nm.
    pub fn curvature_radius(&self, r: [f64; 3]) -> f64 {
        let (_, d2) = self.long_z_derivatives(r);
        let c = (d2[0] * d2[0] + d2[1] * d2[1]).sqrt();
        if c == 0.0 {
            f64::INFINITY
        } else {
            1.0 / c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::RandomStream;

    #[test]
    fn variance_split_is_exact() {
        let c = CrystalModel::si_110();
        for lc in [1.0, 5.43, 50.0, f64::INFINITY] {
            let m = PhononCorrelationModel::new(&c, lc).unwrap();
            let total = m.u_long_nm.powi(2) + m.u_short_nm.powi(2);
            assert!((total / c.u1_nm.powi(2) - 1.0).abs() < 1e-12);
        }
        let inf = PhononCorrelationModel::new(&c, f64::INFINITY).unwrap();
        assert_eq!(inf.u_long_nm, 0.0);
    }

    #[test]
    fn short_cutoff_is_rejected() {
        let c = CrystalModel::si_110();
        assert!(matches!(PhononCorrelationModel::new(&c, 0.3), Err(Error::Domain(_))));
    }

    #[test]
    fn infinite_cutoff_has_no_long_field() {
        let c = CrystalModel::si_110();
        let mut rng = RandomStream::new(3, 0);
        let f = correlated_displacement_field(&c, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(f.long([0.1, 0.2, 0.3]), [0.0; 3]);
        assert_eq!(f.model().u_short_nm, c.u1_nm);
    }

    #[test]
    fn field_is_smooth_on_the_channel_scale() {
        let c = CrystalModel::si_110();
        let d = c.channel_spacing_nm();
        let mut rng = RandomStream::new(4, 0);
        for _ in 0..20 {
            let f = correlated_displacement_field(&c, 10.0 * c.lattice_constant_nm, &mut rng).unwrap();
            for i in 0..200 {
                let r = f.curvature_radius([0.0, 0.0, i as f64 * 0.37]);
                assert!(r > 100.0 * d, "radius {r}");
            }
        }
    }
}
