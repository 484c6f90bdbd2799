//! Spherically symmetric building blocks of thorns and their transforms.

use serde::{Deserialize, Serialize};

use super::orbital::OrbitalModel;
use super::screening::ScreeningModel;
use crate::error::Result;
use crate::numerics::Quadrature;
use crate::units::COULOMB_EV_NM;

const PI: f64 = std::f64::consts::PI;

/// Radial potential energy of a unit positive test charge, eV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialShape {
    /// Screened atom, constant inside the screening model's r_N.
    Atomic { z: f64, screening: ScreeningModel },
    /// Atom convolved with the thermal displacement distribution.
    SmearedAtomic { z: f64, screening: ScreeningModel, u1: f64 },
    /// Point charge in units of e, held constant inside `r_reg`.
    PointCharge { charge: f64, r_reg: f64 },
    /// Charge smeared over an orbital density.
    Cloud { charge: f64, orbital: OrbitalModel },
    /// Z alpha / r [exp(-r/r_max) - exp(-r/r_min)].
    Phenomenological { z: f64, r_max: f64, r_min: f64 },
    /// strength exp(-mu r) / r with strength in eV nm.
    Yukawa { strength: f64, mu: f64 },
}

/// exp(-x) (1 + x) - 1 without cancellation at small x.
fn screened_excess(x: f64) -> f64 {
    if x < 0.1 {
        // sum over n >= 2 of (-1)^n (1 - n) x^n / n!
        let mut term = -x;
        let mut acc = 0.0;
        for n in 2..14 {
            term *= -x / n as f64;
            acc += (1.0 - n as f64) * term;
        }
        acc
    } else {
        (-x).exp() * (1.0 + x) - 1.0
    }
}

impl RadialShape {
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            RadialShape::Atomic { z, screening } => screening.potential(r, *z),
            RadialShape::SmearedAtomic { z, screening, u1 } => screening.smeared(r, *z, *u1),
            RadialShape::PointCharge { charge, r_reg } => charge * COULOMB_EV_NM / r.max(*r_reg),
            RadialShape::Cloud { charge, orbital } => charge * COULOMB_EV_NM * orbital.cloud_potential(r),
            RadialShape::Phenomenological { z, r_max, r_min } => {
                if r < 1e-6 * r_min {
                    // limit 1/r_min - 1/r_max
                    return z * COULOMB_EV_NM * (1.0 / r_min - 1.0 / r_max);
                }
                let d = if r < *r_min {
                    (-r / r_max).exp_m1() - (-r / r_min).exp_m1()
                } else {
                    (-r / r_max).exp() - (-r / r_min).exp()
                };
                z * COULOMB_EV_NM * d / r
            }
            RadialShape::Yukawa { strength, mu } => strength * (-mu * r).exp() / r,
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            RadialShape::Atomic { z, screening } => screening.potential_derivative(r, *z),
            RadialShape::SmearedAtomic { z, screening, u1 } => screening.smeared_derivative(r, *z, *u1),
            RadialShape::PointCharge { charge, r_reg } => {
                if r < *r_reg {
                    0.0
                } else {
                    -charge * COULOMB_EV_NM / (r * r)
                }
            }
            RadialShape::Cloud { charge, orbital } => {
                charge * COULOMB_EV_NM * orbital.cloud_potential_derivative(r)
            }
            RadialShape::Phenomenological { z, r_max, r_min } => {
                if r < 1e-6 * r_min {
                    return z * COULOMB_EV_NM * 0.5 * (1.0 / (r_max * r_max) - 1.0 / (r_min * r_min));
                }
                let (xa, xb) = (r / r_max, r / r_min);
                let d = if xb < 1.0 {
                    screened_excess(xa) - screened_excess(xb)
                } else {
                    (-xa).exp() * (1.0 + xa) - (-xb).exp() * (1.0 + xb)
                };
                -z * COULOMB_EV_NM * d / (r * r)
            }
            RadialShape::Yukawa { strength, mu } => -strength * (-mu * r).exp() * (1.0 / (r * r) + mu / r),
        }
    }

    /// V(r) - c/r, evaluated without cancellation.
    pub fn value_minus_tail(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            RadialShape::PointCharge { charge, r_reg } => {
                if r >= *r_reg {
                    0.0
                } else {
                    charge * COULOMB_EV_NM * (1.0 / r_reg - 1.0 / r)
                }
            }
            RadialShape::Cloud { charge, orbital } => charge * COULOMB_EV_NM * orbital.cloud_potential_deficit(r),
            _ => self.value(r),
        }
    }

    /// Coefficient c of the asymptotic c/r tail, eV nm.
    pub fn tail(&self) -> f64 {
        match self {
            RadialShape::PointCharge { charge, .. } | RadialShape::Cloud { charge, .. } => charge * COULOMB_EV_NM,
            _ => 0.0,
        }
    }

    /// Radius inside which the potential is flat.
    pub fn core_radius(&self) -> f64 {
        match self {
            RadialShape::Atomic { screening, .. } => screening.r_n,
            RadialShape::PointCharge { r_reg, .. } => *r_reg,
            _ => 0.0,
        }
    }

    /// Smallest length on which the shape varies.
    pub fn inner_scale(&self) -> f64 {
        match self {
            RadialShape::Atomic { screening, .. } => {
                if screening.r_n > 0.0 {
                    screening.r_n
                } else {
                    1e-3 / screening.mu_min()
                }
            }
            RadialShape::SmearedAtomic { u1, .. } => *u1,
            RadialShape::PointCharge { r_reg, .. } => r_reg.max(1e-9),
            RadialShape::Cloud { orbital, .. } => 0.1 / orbital.beta,
            RadialShape::Phenomenological { r_min, .. } => *r_min,
            RadialShape::Yukawa { mu, .. } => 1e-3 / mu,
        }
    }

    /// Length beyond which V - c/r is negligible (about 40 e-folds).
    pub fn outer_range(&self) -> f64 {
        match self {
            RadialShape::Atomic { screening, .. } | RadialShape::SmearedAtomic { screening, .. } => {
                40.0 / screening.mu_min()
            }
            RadialShape::PointCharge { r_reg, .. } => r_reg.max(1e-9),
            RadialShape::Cloud { orbital, .. } => (60.0 + 2.0 * orbital.power) / orbital.beta,
            RadialShape::Phenomenological { r_max, .. } => 40.0 * r_max,
            RadialShape::Yukawa { mu, .. } => 40.0 / mu,
        }
    }

    /// Analytic 3-D Fourier transform, eV nm^3, from the charge density
    /// divided by k^2. Infinite at k = 0 when the shape carries net charge.
    pub fn fourier(&self, k: f64) -> f64 {
        match self {
            RadialShape::Atomic { z, screening } => screening.fourier(k, *z),
            RadialShape::SmearedAtomic { z, screening, u1 } => screening.smeared_fourier(k, *z, *u1),
            RadialShape::PointCharge { charge, r_reg } => {
                let x = k * r_reg;
                let j0 = if x < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                4.0 * PI * charge * COULOMB_EV_NM * j0 / (k * k)
            }
            RadialShape::Cloud { charge, orbital } => {
                4.0 * PI * charge * COULOMB_EV_NM * orbital.form_factor(k) / (k * k)
            }
            RadialShape::Phenomenological { z, r_max, r_min } => {
                4.0 * PI
                    * z
                    * COULOMB_EV_NM
                    * (1.0 / (k * k + 1.0 / (r_max * r_max)) - 1.0 / (k * k + 1.0 / (r_min * r_min)))
            }
            RadialShape::Yukawa { strength, mu } => 4.0 * PI * strength / (k * k + mu * mu),
        }
    }

    fn radial_breaks(&self, from: f64, to: f64, period: Option<f64>) -> Vec<f64> {
        let mut pts = vec![from, to];
        let core = self.core_radius();
        if core > from && core < to {
            pts.push(core);
        }
        let lo = self.inner_scale().max(from).max(1e-12);
        if lo < to {
            let decades = (to / lo).log10().max(0.0);
            let n = (decades * 6.0).ceil() as usize + 1;
            for i in 0..=n {
                let r = lo * (to / lo).powf(i as f64 / n as f64);
                if r > from && r < to {
                    pts.push(r);
                }
            }
        }
        if let Some(p) = period {
            let n = ((to - from) / p).ceil().min(20000.0) as usize;
            for i in 1..n {
                pts.push(from + i as f64 * (to - from) / n as f64);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
        pts
    }

    /// Radial sine transform of the potential itself, with the Coulomb tail
    /// handled analytically. Independent of [`Self::fourier`].
    pub fn fourier_numeric(&self, k: f64) -> Result<f64> {
        let c = self.tail();
        let big_r = self.outer_range();
        let pts = self.radial_breaks(0.0, big_r, Some(PI / k));
        let quad = Quadrature::new(0.0, 1e-13).with_max_intervals(200_000);
        let f = |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            r * (k * r).sin() * self.value_minus_tail(r)
        };
        let est = quad.integrate_breaks(f, &pts)?;
        Ok(4.0 * PI / k * est.value + 4.0 * PI * c / (k * k))
    }

    /// Outward kick magnitude in eV for a straight path at impact parameter
    /// b: -2 b integral_0^inf V'(b cosh t) dt. Divide by 1e6 for MeV.
    pub fn kick(&self, b: f64) -> Result<f64> {
        let b = b.abs();
        if b == 0.0 {
            return Ok(0.0);
        }
        let core = self.core_radius();
        let t0 = if b < core { (core / b).acosh() } else { 0.0 };
        let r_end = self.outer_range().max(2.0 * b.max(core));
        let t_end = (r_end / b).acosh();
        // breaks placed at the radii where the shape changes character
        let rb = self.radial_breaks(b.max(core), r_end, None);
        let mut ts: Vec<f64> = rb.iter().map(|&r| (r / b).max(1.0).acosh()).collect();
        ts.push(t0);
        ts.push(t_end);
        ts.retain(|&t| t >= t0 && t <= t_end);
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup();
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        let est = if ts.len() >= 2 {
            quad.integrate_breaks(|t| self.derivative(b * t.cosh()), &ts)?.value
        } else {
            0.0
        };
        // beyond r_end only the c/r tail survives
        let tail = 2.0 * self.tail() / b * (1.0 - t_end.tanh());
        Ok(-2.0 * b * est + tail)
    }

    /// Plane integral 2 pi integral_|t|^inf r (V - c/r) dr - 2 pi c |t|, eV nm^2.
    /// The tail terms cancel between parts of a neutral thorn.
    pub fn plane_profile(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        let c = self.tail();
        let big_r = self.outer_range().max(2.0 * t);
        let pts = self.radial_breaks(t, big_r, None);
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        let est = if big_r > t {
            quad.integrate_breaks(|r| r * self.value_minus_tail(r), &pts)?.value
        } else {
            0.0
        };
        Ok(2.0 * PI * (est - c * t))
    }

    /// Volume integral of V - c/r over all space, eV nm^3.
    pub fn volume_integral(&self) -> Result<f64> {
        let big_r = self.outer_range();
        let pts = self.radial_breaks(0.0, big_r, None);
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        Ok(4.0 * PI * quad.integrate_breaks(|r| r * r * self.value_minus_tail(r), &pts)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::bessel_k1;

    fn samples() -> Vec<RadialShape> {
        let scr = ScreeningModel::moliere(0.0194, 3e-6);
        vec![
            RadialShape::Atomic { z: 14.0, screening: scr.unregularized() },
            RadialShape::Atomic { z: 14.0, screening: scr.clone() },
            RadialShape::SmearedAtomic { z: 14.0, screening: scr, u1: 0.0075 },
            RadialShape::PointCharge { charge: -1.0, r_reg: 1e-5 },
            RadialShape::Cloud { charge: 1.0, orbital: OrbitalModel::yukawa_shell(60.0) },
            RadialShape::Cloud { charge: 1.0, orbital: OrbitalModel::hydrogenic(2, 0.01) },
            RadialShape::Phenomenological { z: 14.0, r_max: 0.0075, r_min: 7.5e-5 },
            RadialShape::Yukawa { strength: 2.0, mu: 100.0 },
        ]
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for s in samples() {
            let radii: &[f64] = match s {
                // rounding in the smeared closed form swamps difference quotients at small r
                RadialShape::SmearedAtomic { .. } => &[1e-3, 0.01, 0.07],
                _ => &[2e-5, 1e-3, 0.01, 0.07],
            };
            for &r in radii {
                let h = 1e-6 * r;
                let fd = (s.value(r + h) - s.value(r - h)) / (2.0 * h);
                let an = s.derivative(r);
                // difference quotients cannot resolve slopes below the rounding of V itself
                let floor = 1e-8 * s.value(r).abs() / r;
                assert!((fd - an).abs() <= 1e-5 * an.abs() + floor, "{s:?} r={r}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn transforms_agree() {
        for s in samples() {
            for &k in &[1.0, 40.0, 600.0, 4000.0] {
                let a = s.fourier(k);
                let n = s.fourier_numeric(k).unwrap();
                let scale = a.abs().max(1e-10 * s.fourier(1.0).abs());
                assert!((a - n).abs() <= 1e-8 * scale, "{s:?} k={k}: {a} vs {n}");
            }
        }
    }

    #[test]
    fn yukawa_kick_matches_bessel_oracle() {
        let (strength, mu) = (14.0 * COULOMB_EV_NM, 80.0);
        let y = RadialShape::Yukawa { strength, mu };
        for &b in &[1e-4, 3e-3, 0.01, 0.05] {
            let want = 2.0 * strength * mu * bessel_k1(mu * b);
            assert!((y.kick(b).unwrap() / want - 1.0).abs() < 1e-8, "b={b}");
        }
        // Coulomb limit
        let c = RadialShape::Yukawa { strength, mu: 1e-6 };
        let b = 1e-3;
        assert!((c.kick(b).unwrap() / (2.0 * strength / b) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn capped_point_kick_closed_form() {
        let p = RadialShape::PointCharge { charge: 1.0, r_reg: 1e-4 };
        for &b in &[2e-5, 5e-5, 9.9e-5, 2e-4, 1e-2] {
            let want = if b < 1e-4 {
                2.0 * COULOMB_EV_NM / b * (1.0 - (1.0 - b * b / 1e-8).sqrt())
            } else {
                2.0 * COULOMB_EV_NM / b
            };
            assert!((p.kick(b).unwrap() / want - 1.0).abs() < 1e-8, "b={b}");
        }
    }

    #[test]
    fn plane_profile_of_neutral_shapes_integrates_to_volume() {
        let quad = Quadrature::new(0.0, 1e-10);
        for s in samples().into_iter().filter(|s| s.tail() == 0.0) {
            let r = s.outer_range();
            let total = quad
                .integrate_breaks(|t| 2.0 * s.plane_profile(t).unwrap(), &s.radial_breaks(0.0, r, None))
                .unwrap();
            let vol = s.volume_integral().unwrap();
            assert!((total.value / vol - 1.0).abs() < 1e-6, "{s:?}");
        }
    }
}
