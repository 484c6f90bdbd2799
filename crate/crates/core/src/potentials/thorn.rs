//! Thorns: short-range residual potentials built from displaced radial shapes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::orbital::OrbitalModel;
use super::screening::ScreeningModel;
use super::shape::RadialShape;
use crate::error::{Error, Result};
use crate::units::HBAR_C;

/// Cap radius for the point electron, nm. Only matters above 10^3 MeV/c
/// transfers, far beyond the kinematic limit of electron collisions.
pub const ELECTRON_CORE_NM: f64 = 1.0e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThornPart {
    pub center: [f64; 3],
    pub scale: f64,
    pub shape: RadialShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thorn {
    pub parts: Vec<ThornPart>,
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl Thorn {
    pub fn single(shape: RadialShape) -> Self {
        Thorn {
            parts: vec![ThornPart {
                center: [0.0; 3],
                scale: 1.0,
                shape,
            }],
        }
    }

    /// Multiply every part by `factor` (charge scaling).
    pub fn scaled(mut self, factor: f64) -> Self {
        for p in &mut self.parts {
            p.scale *= factor;
        }
        self
    }

    pub fn potential(&self, r: [f64; 3]) -> f64 {
        self.parts
            .iter()
            .map(|p| p.scale * p.shape.value(norm(sub(r, p.center))))
            .sum()
    }

    pub fn gradient(&self, r: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for p in &self.parts {
            let d = sub(r, p.center);
            let n = norm(d);
            if n == 0.0 {
                continue;
            }
            let dv = p.scale * p.shape.derivative(n) / n;
            for i in 0..3 {
                g[i] += dv * d[i];
            }
        }
        g
    }

    /// Net coefficient of the 1/r tail, eV nm. Zero for a neutral thorn.
    pub fn net_tail(&self) -> f64 {
        self.parts.iter().map(|p| p.scale * p.shape.tail()).sum()
    }

    fn is_neutral(&self) -> bool {
        let scale: f64 = self.parts.iter().map(|p| (p.scale * p.shape.tail()).abs()).sum();
        self.net_tail().abs() <= 1e-12 * scale.max(1e-300)
    }

    fn transform_with<F: Fn(&RadialShape, f64) -> Result<f64>>(&self, q: [f64; 3], ft: F) -> Result<Complex64> {
        let k = [q[0] / HBAR_C, q[1] / HBAR_C, q[2] / HBAR_C];
        let kn = norm(k);
        if kn == 0.0 {
            if !self.is_neutral() {
                return Err(Error::Divergence("Fourier transform at q = 0 of a charged thorn".into()));
            }
            let mut total = 0.0;
            for p in &self.parts {
                total += p.scale * p.shape.volume_integral()?;
            }
            return Ok(Complex64::new(total, 0.0));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for p in &self.parts {
            let phase = -(k[0] * p.center[0] + k[1] * p.center[1] + k[2] * p.center[2]);
            total += Complex64::from_polar(p.scale * ft(&p.shape, kn)?, phase);
        }
        Ok(total)
    }

    /// Fourier transform at momentum transfer q (MeV), eV nm^3, from the
    /// analytic charge-density transforms.
    pub fn fourier(&self, q: [f64; 3]) -> Result<Complex64> {
        self.transform_with(q, |s, k| Ok(s.fourier(k)))
    }

    /// Same transform by radial quadrature of the potentials.
    pub fn fourier_numeric(&self, q: [f64; 3]) -> Result<Complex64> {
        self.transform_with(q, |s, k| s.fourier_numeric(k))
    }

    /// Eikonal momentum transfer (MeV) for a straight path along z at
    /// transverse position b (nm).
    pub fn kick(&self, b: [f64; 2]) -> Result<[f64; 2]> {
        let mut q = [0.0; 2];
        for p in &self.parts {
            let d = [b[0] - p.center[0], b[1] - p.center[1]];
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if n == 0.0 {
                continue;
            }
            let k = p.scale * p.shape.kick(n)? * 1e-6 / n;
            q[0] += k * d[0];
            q[1] += k * d[1];
        }
        Ok(q)
    }

    /// True when all parts share one centre on the z axis.
    pub fn is_central(&self) -> bool {
        self.parts
            .iter()
            .all(|p| p.center[0] == 0.0 && p.center[1] == 0.0)
    }

    /// Potential integrated over the plane normal to `axis` at coordinate
    /// `x` along it, eV nm^2.
    pub fn plane_profile(&self, axis: [f64; 3], x: f64) -> Result<f64> {
        if !self.is_neutral() {
            return Err(Error::Divergence(
                "plane integral of a thorn with net Coulomb charge".into(),
            ));
        }
        let n = norm(axis);
        if n == 0.0 {
            return Err(Error::domain("projection axis must be non-zero"));
        }
        let mut total = 0.0;
        for p in &self.parts {
            let c = (p.center[0] * axis[0] + p.center[1] * axis[1] + p.center[2] * axis[2]) / n;
            total += p.scale * p.shape.plane_profile(x - c)?;
        }
        Ok(total)
    }
}

/// Residual potential of one vibrating atom: the atom at its instantaneous
/// position minus the thermally smeared atom at the mean site (origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThornVib {
    pub z: f64,
    pub screening: ScreeningModel,
    pub u1: f64,
    pub u: [f64; 3],
}

impl ThornVib {
    pub fn thorn(&self) -> Thorn {
        let mut parts = vec![ThornPart {
            center: self.u,
            scale: 1.0,
            shape: RadialShape::Atomic {
                z: self.z,
                screening: self.screening.clone(),
            },
        }];
        if self.u1 > 0.0 {
            parts.push(ThornPart {
                center: [0.0; 3],
                scale: -1.0,
                shape: RadialShape::SmearedAtomic {
                    z: self.z,
                    screening: self.screening.clone(),
                    u1: self.u1,
                },
            });
        } else {
            parts.push(ThornPart {
                center: [0.0; 3],
                scale: -1.0,
                shape: RadialShape::Atomic {
                    z: self.z,
                    screening: self.screening.clone(),
                },
            });
        }
        Thorn { parts }
    }
}

/// Residual potential of one atomic electron at offset `s` from a nucleus
/// at `u`: point electron minus its orbital cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThornElectron {
    pub orbital: OrbitalModel,
    pub s: [f64; 3],
    pub u: [f64; 3],
    pub r_reg: f64,
}

impl ThornElectron {
    pub fn new(orbital: OrbitalModel, s: [f64; 3], u: [f64; 3]) -> Self {
        Self {
            orbital,
            s,
            u,
            r_reg: ELECTRON_CORE_NM,
        }
    }

    pub fn electron_position(&self) -> [f64; 3] {
        [self.u[0] + self.s[0], self.u[1] + self.s[1], self.u[2] + self.s[2]]
    }

    pub fn thorn(&self) -> Thorn {
        Thorn {
            parts: vec![
                ThornPart {
                    center: self.electron_position(),
                    scale: 1.0,
                    shape: RadialShape::PointCharge {
                        charge: -1.0,
                        r_reg: self.r_reg,
                    },
                },
                ThornPart {
                    center: self.u,
                    scale: 1.0,
                    shape: RadialShape::Cloud {
                        charge: 1.0,
                        orbital: self.orbital,
                    },
                },
            ],
        }
    }
}

/// Spherical thorn Z alpha / r [exp(-r/r_max) - exp(-r/r_min)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhenomenologicalThorn {
    pub z_eff: f64,
    pub r_max: f64,
    pub r_min: f64,
}

impl PhenomenologicalThorn {
    pub fn new(z_eff: f64, r_max: f64, r_min: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_min >= 0.0 && r_min < r_max) {
            return Err(Error::domain(format!(
                "need 0 <= r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        Ok(Self { z_eff, r_max, r_min })
    }

    pub fn shape(&self) -> Result<RadialShape> {
        if self.r_min <= 0.0 {
            return Err(Error::Divergence(
                "unregularised Coulomb peak (r_min = 0)".into(),
            ));
        }
        Ok(RadialShape::Phenomenological {
            z: self.z_eff,
            r_max: self.r_max,
            r_min: self.r_min,
        })
    }

    pub fn thorn(&self) -> Result<Thorn> {
        Ok(Thorn::single(self.shape()?))
    }
}

/// delta V_vib at point r, eV.
pub fn thorn_vib_potential(r: [f64; 3], t: &ThornVib) -> f64 {
    t.thorn().potential(r)
}

/// delta V_e at point r, eV.
pub fn thorn_electron_potential(r: [f64; 3], t: &ThornElectron) -> f64 {
    t.thorn().potential(r)
}

/// Continuous part of the electron-thorn charge density in units of e
/// nm^-3: the positive orbital cloud. The thorn also holds a point charge
/// -e at [`ThornElectron::electron_position`], so the total charge is zero.
pub fn thorn_electron_density(r: [f64; 3], t: &ThornElectron) -> f64 {
    t.orbital.density(norm(sub(r, t.u)))
}

/// Plane-integrated profile of a thorn along `axis`, sampled at `coords`.
pub fn projected_profile(thorn: &Thorn, axis: [f64; 3], coords: &[f64]) -> Result<Vec<f64>> {
    coords.iter().map(|&x| thorn.plane_profile(axis, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Quadrature;
    use crate::units::COULOMB_EV_NM;

    fn vib(u: [f64; 3]) -> ThornVib {
        ThornVib {
            z: 14.0,
            screening: ScreeningModel::moliere(0.0194, 3e-6),
            u1: 0.0075,
            u,
        }
    }

    #[test]
    fn vanishing_thorn() {
        let t = ThornVib { u1: 0.0, ..vib([0.0; 3]) };
        for &r in &[[0.01, 0.0, 0.0], [0.0, 0.003, 0.02], [1e-5, 0.0, 0.0]] {
            assert!(thorn_vib_potential(r, &t).abs() < 1e-10);
        }
    }

    #[test]
    fn vib_thorn_far_field_is_weak() {
        let t = vib([0.0075, 0.0, 0.0]);
        let peak = thorn_vib_potential([0.0075 + 1e-4, 0.0, 0.0], &t).abs();
        let far = thorn_vib_potential([0.0, 0.2, 0.0], &t).abs();
        assert!(far < 1e-3 * peak);
    }

    #[test]
    fn vib_thorn_integrates_to_zero() {
        let th = vib([0.0075, 0.0, 0.0]).thorn();
        let z0 = th.fourier([0.0; 3]).unwrap();
        let abs_scale = th.parts[1].shape.volume_integral().unwrap().abs();
        assert!(z0.norm() < 1e-3 * abs_scale);
    }

    #[test]
    fn profile_linearity_and_sign_change() {
        let t = vib([0.0075, 0.0, 0.0]);
        let th = t.thorn();
        let axis = [1.0, 0.0, 0.0];
        let xs: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.001).collect();
        let prof = projected_profile(&th, axis, &xs).unwrap();
        let atom = Thorn { parts: vec![th.parts[0].clone()] };
        let smeared = Thorn { parts: vec![th.parts[1].clone()] };
        for (i, &x) in xs.iter().enumerate() {
            let a = atom.plane_profile(axis, x).unwrap();
            let s = smeared.plane_profile(axis, x).unwrap();
            assert!((a + s - prof[i]).abs() <= 1e-8 * a.abs().max(1.0));
        }
        assert!(prof.iter().any(|&v| v > 0.0) && prof.iter().any(|&v| v < 0.0));
        // zero net integral
        let quad = Quadrature::new(0.0, 1e-9);
        let pts: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.005).collect();
        let total = quad.integrate_breaks(|x| th.plane_profile(axis, x).unwrap(), &pts).unwrap();
        let abs_total = quad
            .integrate_breaks(|x| th.plane_profile(axis, x).unwrap().abs(), &pts)
            .unwrap();
        assert!(total.value.abs() < 0.01 * abs_total.value);
    }

    #[test]
    fn electron_thorn_is_neutral_with_dipole_tail() {
        let orb = OrbitalModel::yukawa_shell(60.0);
        let rad = orb.radius();
        let s = [0.3 * rad, 0.0, 0.0];
        let t = ThornElectron::new(orb, s, [0.0; 3]);
        let th = t.thorn();
        assert!(th.net_tail().abs() < 1e-15);
        for dir in [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.0, 0.0, 1.0]] {
            let rr = 20.0 * rad;
            let r = [rr * dir[0], rr * dir[1], rr * dir[2]];
            let v = thorn_electron_potential(r, &t);
            let dipole = -COULOMB_EV_NM * (s[0] * r[0]) / rr.powi(3);
            if dipole.abs() > 0.0 {
                assert!((v / dipole - 1.0).abs() < 0.02, "dir {dir:?}: {v} vs {dipole}");
            } else {
                assert!(v.abs() < 0.02 * COULOMB_EV_NM * s[0] / (rr * rr));
            }
        }
        // r V -> 0
        let far = 200.0 * rad;
        assert!((far * thorn_electron_potential([far, 0.0, 0.0], &t)).abs() < 1e-2 * COULOMB_EV_NM);
    }

    #[test]
    fn centred_electron_thorn_is_spherical() {
        let t = ThornElectron::new(OrbitalModel::hydrogenic(2, 0.01), [0.0; 3], [0.0; 3]);
        let a = thorn_electron_potential([0.013, 0.0, 0.0], &t);
        let b = thorn_electron_potential([0.0, 0.013 * 0.6, 0.013 * 0.8], &t);
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn cloud_normalisation() {
        let orb = OrbitalModel::hydrogenic(2, 0.01);
        let quad = Quadrature::new(0.0, 1e-12);
        let t = ThornElectron::new(orb, [0.002, 0.0, 0.0], [0.0; 3]);
        let q = quad
            .integrate_to_infinity(
                |r| 4.0 * std::f64::consts::PI * r * r * thorn_electron_density([r, 0.0, 0.0], &t),
                0.0,
                0.01,
            )
            .unwrap();
        assert!((q.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phenomenological_requires_regulator() {
        assert!(matches!(
            PhenomenologicalThorn::new(14.0, 0.0075, 0.0).unwrap().thorn(),
            Err(Error::Divergence(_))
        ));
        assert!(PhenomenologicalThorn::new(14.0, 0.0075, 0.01).is_err());
    }

    #[test]
    fn charged_thorn_diverges_at_zero_q() {
        let th = Thorn::single(RadialShape::PointCharge { charge: 1.0, r_reg: 1e-6 });
        assert!(matches!(th.fourier([0.0; 3]), Err(Error::Divergence(_))));
    }
}
