//! Spherically averaged one-electron densities of the form
//! n(r) = beta^(k+3) / (4 pi Gamma(k+3)) r^k exp(-beta r).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{bessel_k0, gamma_p, gamma_q, ln_gamma};
use crate::numerics::Quadrature;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalModel {
    /// Power k of r in the density; -1 gives the density of a Yukawa screening cloud.
    pub power: f64,
    /// Exponential slope beta, nm^-1.
    pub beta: f64,
}

impl OrbitalModel {
    pub fn new(power: f64, beta: f64) -> Result<Self> {
        if !(power > -2.0 && power.is_finite()) {
            return Err(Error::domain(format!("orbital power must exceed -2, got {power}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain("orbital slope must be positive"));
        }
        Ok(Self { power, beta })
    }

    /// Density whose potential is a single Yukawa term exp(-mu r)/r minus a
    /// point charge.
    pub fn yukawa_shell(mu: f64) -> Self {
        Self { power: -1.0, beta: mu }
    }

    /// Hydrogen-like s shell with principal number n and Bohr-type radius a.
    pub fn hydrogenic(n: u32, a: f64) -> Self {
        let n = n.max(1);
        Self {
            power: 2.0 * n as f64 - 2.0,
            beta: 2.0 / (n as f64 * a),
        }
    }

    /// Mean radius, used as the orbital size.
    pub fn radius(&self) -> f64 {
        (self.power + 3.0) / self.beta
    }

    pub fn mean_square_radius(&self) -> f64 {
        (self.power + 3.0) * (self.power + 4.0) / (self.beta * self.beta)
    }

    /// |psi|^2 at radius r, nm^-3.
    pub fn density(&self, r: f64) -> f64 {
        let k = self.power;
        if r <= 0.0 {
            return if k < 0.0 {
                f64::INFINITY
            } else if k == 0.0 {
                self.beta.powi(3) / (8.0 * PI)
            } else {
                0.0
            };
        }
        let ln = (k + 3.0) * self.beta.ln() - ln_gamma(k + 3.0) + k * r.ln() - self.beta * r;
        ln.exp() / (4.0 * PI)
    }

    /// Probability density of the radius, 4 pi r^2 n(r).
    pub fn radial_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let k = self.power;
        ((k + 3.0) * self.beta.ln() - ln_gamma(k + 3.0) + (k + 2.0) * r.ln() - self.beta * r).exp()
    }

    /// Fraction of the electron inside radius r.
    pub fn enclosed(&self, r: f64) -> f64 {
        gamma_p(self.power + 3.0, self.beta * r.max(0.0))
    }

    /// Form factor f(q) with q a wave number in nm^-1; f(0) = 1.
    pub fn form_factor(&self, q: f64) -> f64 {
        let k = self.power;
        let b = self.beta;
        let x = q / b;
        if x < 1e-4 {
            return 1.0 - self.mean_square_radius() * q * q / 6.0;
        }
        // b^(k+3) / ((k+2) q) Im[(b - i q)^-(k+2)]
        let n = k + 2.0;
        if n.fract() == 0.0 && n <= 16.0 && x < 1e4 {
            let m = n as i32;
            let w = Complex64::new(1.0, x).powi(m);
            return w.im / ((1.0 + x * x).powi(m) * n * x);
        }
        let w = Complex64::new(1.0, -x).powf(-n);
        w.im / (n * x)
    }

    /// Potential of the unit-charge cloud divided by alpha hbar c, nm^-1.
    pub fn cloud_potential(&self, r: f64) -> f64 {
        let k = self.power;
        let b = self.beta;
        let outer = b / (k + 2.0) * gamma_q(k + 2.0, b * r);
        if r < 1e-8 / b {
            // P(k+3, br)/r vanishes at the origin for k > -2
            return outer;
        }
        gamma_p(k + 3.0, b * r) / r + outer
    }

    /// `cloud_potential(r) - 1/r` without cancellation at large r.
    pub fn cloud_potential_deficit(&self, r: f64) -> f64 {
        let k = self.power;
        let b = self.beta;
        let outer = b / (k + 2.0) * gamma_q(k + 2.0, b * r);
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        outer - gamma_q(k + 3.0, b * r) / r
    }

    /// Radial derivative of [`Self::cloud_potential`]: minus the enclosed
    /// charge over r^2.
    pub fn cloud_potential_derivative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -self.enclosed(r) / (r * r)
    }

    /// Density integrated along a straight line at distance b, nm^-2.
    pub fn line_density(&self, b: f64) -> Result<f64> {
        if (self.power + 1.0).abs() < 1e-14 {
            let mu = self.beta;
            return Ok(mu * mu / (2.0 * PI) * bessel_k0(mu * b));
        }
        let f = |t: f64| self.density((b * b + t * t).sqrt());
        let quad = Quadrature::new(0.0, 1e-10);
        let scale = (1.0 / self.beta).max(b);
        Ok(2.0 * quad.integrate_to_infinity(f, 0.0, scale)?.value)
    }

    /// Random position drawn from |psi|^2 around the origin.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let shape = self.power + 3.0;
        let r = Gamma::new(shape, 1.0 / self.beta)
            .expect("valid gamma parameters")
            .sample(rng);
        let d = isotropic_direction(rng);
        [r * d[0], r * d[1], r * d[2]]
    }
}

pub(crate) fn isotropic_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::bessel_j0;

    fn shapes() -> Vec<OrbitalModel> {
        vec![
            OrbitalModel::yukawa_shell(60.0),
            OrbitalModel::hydrogenic(1, 0.002),
            OrbitalModel::hydrogenic(2, 0.01),
            OrbitalModel::hydrogenic(3, 0.02),
        ]
    }

    #[test]
    fn normalised() {
        let quad = Quadrature::new(0.0, 1e-12);
        for o in shapes() {
            let n = quad
                .integrate_to_infinity(|r| o.radial_density(r), 0.0, 1.0 / o.beta)
                .unwrap();
            assert!((n.value - 1.0).abs() < 1e-8, "{o:?}");
        }
    }

    #[test]
    fn form_factor_matches_quadrature() {
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(10000);
        for o in shapes() {
            for &q in &[0.0, 0.1 * o.beta, o.beta, 7.0 * o.beta] {
                let f = |r: f64| {
                    let j = if q * r < 1e-8 { 1.0 } else { (q * r).sin() / (q * r) };
                    o.radial_density(r) * j
                };
                let pts: Vec<f64> = (0..=200).map(|i| i as f64 * 60.0 / o.beta / 200.0).collect();
                let est = quad.integrate_breaks(f, &pts).unwrap();
                assert!((est.value - o.form_factor(q)).abs() < 1e-9, "{o:?} q={q}");
            }
        }
    }

    #[test]
    fn cloud_potential_obeys_gauss_law() {
        for o in shapes() {
            let far = 80.0 / o.beta;
            assert!((o.cloud_potential(far) * far - 1.0).abs() < 1e-10);
            for &r in &[0.1 / o.beta, 1.0 / o.beta, 5.0 / o.beta] {
                let h = 1e-6 * r;
                let fd = (o.cloud_potential(r + h) - o.cloud_potential(r - h)) / (2.0 * h);
                let an = o.cloud_potential_derivative(r);
                let floor = 1e-9 * o.cloud_potential(r) / r;
                assert!((fd - an).abs() < 1e-6 * an.abs() + floor, "{o:?} r={r}");
            }
        }
        // Yukawa shell: 1/r - exp(-mu r)/r
        let o = OrbitalModel::yukawa_shell(60.0);
        for &r in &[1e-4f64, 0.01, 0.05, 0.5] {
            let want = (1.0 - (-60.0 * r).exp()) / r;
            assert!((o.cloud_potential(r) / want - 1.0).abs() < 1e-10);
            let deficit = -(-60.0 * r).exp() / r;
            assert!((o.cloud_potential_deficit(r) / deficit - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn line_density_integrates_to_one() {
        let quad = Quadrature::new(0.0, 1e-9);
        for o in shapes() {
            let est = quad
                .integrate_to_infinity(|b| 2.0 * PI * b * o.line_density(b).unwrap(), 0.0, 1.0 / o.beta)
                .unwrap();
            assert!((est.value - 1.0).abs() < 1e-6, "{o:?}");
            // 2-D transform of the line density equals the form factor
            let q = o.beta;
            let ft = quad
                .integrate_to_infinity(
                    |b| 2.0 * PI * b * bessel_j0(q * b) * o.line_density(b).unwrap(),
                    0.0,
                    1.0 / o.beta,
                )
                .unwrap();
            assert!((ft.value - o.form_factor(q)).abs() < 1e-5);
        }
    }
}
