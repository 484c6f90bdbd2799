//! Screened atomic potential as a sum of Yukawa terms, its Gaussian thermal
//! smearing, and the plane / string averages used by the continuum model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{erfc, erfcx};
use crate::numerics::quad::{GL4_NODES, GL4_WEIGHTS};
use crate::numerics::Quadrature;
use crate::units::COULOMB_EV_NM;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YukawaTerm {
    pub weight: f64,
    /// Inverse range, nm^-1.
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningModel {
    pub terms: Vec<YukawaTerm>,
    /// Radius below which the potential is held constant.
    pub r_n: f64,
}

impl ScreeningModel {
    pub fn new(terms: Vec<YukawaTerm>, r_n: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::domain("screening model needs at least one term"));
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("screening weights sum to {total}, not 1")));
        }
        if terms.iter().any(|t| !(t.mu > 0.0 && t.mu.is_finite())) {
            return Err(Error::domain("inverse screening ranges must be positive"));
        }
        if !(r_n >= 0.0) {
            return Err(Error::domain("nuclear radius must be non-negative"));
        }
        Ok(Self { terms, r_n })
    }

    /// Molière parametrisation in units of the Thomas–Fermi radius.
    pub fn moliere(a_tf: f64, r_n: f64) -> Self {
        let terms = [(0.10, 6.0), (0.55, 1.2), (0.35, 0.3)]
            .iter()
            .map(|&(weight, m)| YukawaTerm { weight, mu: m / a_tf })
            .collect();
        Self { terms, r_n }
    }

    pub fn single_yukawa(mu: f64, r_n: f64) -> Self {
        Self {
            terms: vec![YukawaTerm { weight: 1.0, mu }],
            r_n,
        }
    }

    /// Same screening with a point nucleus.
    pub fn unregularized(&self) -> Self {
        Self {
            terms: self.terms.clone(),
            r_n: 0.0,
        }
    }

    pub fn mu_min(&self) -> f64 {
        self.terms.iter().map(|t| t.mu).fold(f64::INFINITY, f64::min)
    }

    /// Screening function chi(r) = sum w exp(-mu r).
    pub fn chi(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.weight * (-t.mu * r).exp()).sum()
    }

    fn chi_derivative(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| -t.mu * t.weight * (-t.mu * r).exp()).sum()
    }

    /// Potential energy of a unit positive charge, eV, nucleus capped at r_N.
    pub fn potential(&self, r: f64, z: f64) -> f64 {
        let r = r.max(self.r_n);
        if r == 0.0 {
            return f64::INFINITY;
        }
        z * COULOMB_EV_NM * self.chi(r) / r
    }

    /// dV/dr, zero inside the cap.
    pub fn potential_derivative(&self, r: f64, z: f64) -> f64 {
        if r < self.r_n {
            return 0.0;
        }
        z * COULOMB_EV_NM * (self.chi_derivative(r) * r - self.chi(r)) / (r * r)
    }

    /// Three-dimensional Fourier transform in eV nm^3 at wave number k
    /// (nm^-1), including the constant-core cap.
    pub fn fourier(&self, k: f64, z: f64) -> f64 {
        let point: f64 = self.terms.iter().map(|t| t.weight / (k * k + t.mu * t.mu)).sum();
        let mut total = 4.0 * PI * z * COULOMB_EV_NM * point;
        if self.r_n > 0.0 {
            // the core correction lives on [0, r_N] where the integrand is a
            // smooth low-order function; a fixed Gauss rule is exact to rounding
            let rn = self.r_n;
            let cap = self.potential(rn, z);
            let panels = 4 + (2.0 * k * rn).ceil() as usize;
            let h = rn / panels as f64;
            let mut corr = 0.0;
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * h;
                for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                    let r = mid + 0.5 * h * x;
                    let inner = r * cap - z * COULOMB_EV_NM * self.chi(r);
                    corr += 0.5 * h * w * r * sinc(k * r) * inner;
                }
            }
            total += 4.0 * PI * corr;
        }
        total
    }

    /// Potential of the atom smeared by an isotropic Gaussian with per-axis
    /// width `u1`, eV. The cap is ignored: the smearing already removes the
    /// Coulomb peak.
    pub fn smeared(&self, r: f64, z: f64, u1: f64) -> f64 {
        z * COULOMB_EV_NM
            * self
                .terms
                .iter()
                .map(|t| t.weight * smeared_yukawa(r, t.mu, u1))
                .sum::<f64>()
    }

    pub fn smeared_derivative(&self, r: f64, z: f64, u1: f64) -> f64 {
        z * COULOMB_EV_NM
            * self
                .terms
                .iter()
                .map(|t| t.weight * smeared_yukawa_derivative(r, t.mu, u1))
                .sum::<f64>()
    }

    /// Fourier transform of the smeared potential, eV nm^3.
    pub fn smeared_fourier(&self, k: f64, z: f64, u1: f64) -> f64 {
        let c = 4.0 * PI * z * COULOMB_EV_NM;
        c * (-0.5 * k * k * u1 * u1).exp()
            * self.terms.iter().map(|t| t.weight / (k * k + t.mu * t.mu)).sum::<f64>()
    }

    /// Smeared potential integrated over a plane at distance x, eV nm.
    pub fn smeared_plane(&self, x: f64, z: f64, u1: f64) -> f64 {
        z * COULOMB_EV_NM
            * self
                .terms
                .iter()
                .map(|t| t.weight * smeared_yukawa_plane(x, t.mu, u1).0)
                .sum::<f64>()
    }

    /// d/dx of [`Self::smeared_plane`], eV.
    pub fn smeared_plane_derivative(&self, x: f64, z: f64, u1: f64) -> f64 {
        z * COULOMB_EV_NM
            * self
                .terms
                .iter()
                .map(|t| t.weight * smeared_yukawa_plane(x, t.mu, u1).1)
                .sum::<f64>()
    }

    /// Smeared potential integrated along a line at distance b, eV nm.
    pub fn smeared_string(&self, b: f64, z: f64, u1: f64) -> Result<f64> {
        let decay = 1.0 / self.mu_min();
        let f = |t: f64| self.smeared((b * b + t * t).sqrt(), z, u1);
        let quad = Quadrature::new(0.0, 1e-11);
        let scale = decay.min(b.max(u1));
        let est = quad.integrate_to_infinity(f, 0.0, scale)?;
        Ok(2.0 * est.value)
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// exp(-mu r)/r convolved with an isotropic Gaussian of per-axis width s.
pub fn smeared_yukawa(r: f64, mu: f64, s: f64) -> f64 {
    let a = mu * s / SQRT_2;
    let r = r.abs();
    if r < 1e-5 * s {
        return (2.0 / PI).sqrt() / s - mu * erfcx(a);
    }
    let rp = r / (s * SQRT_2);
    let (t1, t2) = yukawa_pair(r, mu, a, rp);
    (t1 - t2) / (2.0 * r)
}

/// exp(a^2 - mu r) erfc(a - r') and exp(a^2 + mu r) erfc(a + r'), written
/// without overflow.
#[inline]
fn yukawa_pair(r: f64, mu: f64, a: f64, rp: f64) -> (f64, f64) {
    let g = (-rp * rp).exp();
    let t1 = if a >= rp {
        g * erfcx(a - rp)
    } else {
        (a * a - mu * r).exp() * erfc(a - rp)
    };
    let t2 = g * erfcx(a + rp);
    (t1, t2)
}

pub fn smeared_yukawa_derivative(r: f64, mu: f64, s: f64) -> f64 {
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let r = r.abs();
    let a = mu * s / SQRT_2;
    if r < 0.015 * s {
        // Taylor series from (nabla^2 - mu^2) V = -4 pi G with G the Gaussian
        let v0 = (2.0 / PI).sqrt() / s - mu * erfcx(a);
        let g0 = (2.0 * PI * s * s).powf(-1.5);
        let f2 = (mu * mu * v0 - 4.0 * PI * g0) / 3.0;
        let f4 = 0.6 * (mu * mu * f2 + 4.0 * PI * g0 / (s * s));
        return sign * (f2 * r + f4 * r * r * r / 6.0);
    }
    let rp = r / (s * SQRT_2);
    let (t1, t2) = yukawa_pair(r, mu, a, rp);
    let cf = t1 - t2;
    let dcf = -mu * (t1 + t2) + 2.0 * FRAC_2_SQRT_PI / (s * SQRT_2) * (-rp * rp).exp();
    sign * (dcf / (2.0 * r) - cf / (2.0 * r * r))
}

/// Plane integral of the smeared Yukawa at distance x and its x-derivative.
pub fn smeared_yukawa_plane(x: f64, mu: f64, s: f64) -> (f64, f64) {
    let a = mu * s / SQRT_2;
    let ax = x.abs();
    let xp = ax / (s * SQRT_2);
    let (t1, t2) = yukawa_pair(ax, mu, a, xp);
    let value = PI / mu * (t1 + t2);
    let slope = PI * (t2 - t1);
    (value, if x < 0.0 { -slope } else { slope })
}

/// Atomic potential V_A(r) in eV with the nuclear cap.
pub fn atomic_potential(r: f64, s: &ScreeningModel, z: u32) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("radius must be non-negative, got {r}")));
    }
    Ok(s.potential(r, z as f64))
}

/// Thermally smeared atomic potential in eV.
pub fn smeared_atomic_potential(r: f64, s: &ScreeningModel, z: u32, u1: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("radius must be non-negative, got {r}")));
    }
    if !(u1 > 0.0) {
        return Err(Error::domain("u1 must be positive"));
    }
    Ok(s.smeared(r, z as f64, u1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Quadrature;

    fn si() -> ScreeningModel {
        ScreeningModel::moliere(0.0194, 3e-6)
    }

    #[test]
    fn coulomb_limit_at_nucleus() {
        let s = si();
        let r = s.r_n * (1.0 + 1e-9);
        let rv = r * atomic_potential(r, &s, 14).unwrap();
        assert!((rv / (14.0 * COULOMB_EV_NM) - 1.0).abs() < 1e-3);
        assert!(atomic_potential(-1.0, &s, 14).is_err());
    }

    #[test]
    fn yukawa_decay_bound() {
        let s = si();
        let a = 0.0194;
        let ratio = s.potential(10.0 * a, 14.0) / s.potential(a, 14.0);
        assert!(ratio < (-9.0 * s.mu_min() * a).exp() * 0.1);
    }

    #[test]
    fn single_yukawa_transform_matches_quadrature() {
        let mu = 50.0;
        let s = ScreeningModel::single_yukawa(mu, 0.0);
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        for &k in &[1.0, 30.0, 400.0] {
            let panels: Vec<f64> = (0..=400).map(|i| i as f64 * 40.0 / mu / 400.0).collect();
            let est = quad
                .integrate_breaks(|r| 4.0 * PI / k * r * (k * r).sin() * s.potential(r, 1.0), &panels)
                .unwrap();
            let exact = 4.0 * PI * COULOMB_EV_NM / (k * k + mu * mu);
            assert!((est.value / exact - 1.0).abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn capped_transform_agrees_with_quadrature() {
        let s = ScreeningModel::moliere(0.0194, 2e-3);
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        for &k in &[0.5, 10.0, 300.0, 3000.0] {
            let mut pts = vec![0.0, s.r_n];
            let n = 800;
            for i in 1..=n {
                pts.push(s.r_n + i as f64 * 3.0 / n as f64);
            }
            let est = quad
                .integrate_breaks(|r| 4.0 * PI * r * r * sinc(k * r) * s.potential(r, 1.0), &pts)
                .unwrap();
            let ft = s.fourier(k, 1.0);
            assert!((est.value / ft - 1.0).abs() < 1e-7, "k={k}: {} vs {}", est.value, ft);
        }
    }

    #[test]
    fn smeared_limits() {
        let s = si();
        // small width recovers the bare potential away from the nucleus
        for &r in &[1e-3, 0.01, 0.05] {
            let bare = s.potential(r, 14.0);
            let sm = s.smeared(r, 14.0, 1e-7);
            assert!((sm / bare - 1.0).abs() < 1e-6);
        }
        // smeared Coulomb at the origin
        let c = ScreeningModel::single_yukawa(1e-12, 0.0);
        let u1 = 0.0075;
        let v0 = c.smeared(0.0, 14.0, u1);
        let want = 14.0 * COULOMB_EV_NM * (2.0 / PI).sqrt() / u1;
        assert!((v0 / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn smeared_is_continuous_across_branches() {
        let (mu, s) = (300.0, 0.0075);
        let a = mu * s / SQRT_2;
        let r_switch = a * s * SQRT_2;
        let lo = smeared_yukawa(r_switch * (1.0 - 1e-9), mu, s);
        let hi = smeared_yukawa(r_switch * (1.0 + 1e-9), mu, s);
        assert!((lo / hi - 1.0).abs() < 1e-7);
        let near = smeared_yukawa(1.0001e-5 * s, mu, s);
        let at = smeared_yukawa(0.0, mu, s);
        assert!((near / at - 1.0).abs() < 1e-8);
    }

    #[test]
    fn smeared_derivative_matches_finite_difference() {
        let s = si();
        let u1 = 0.0075;
        for &r in &[1e-3f64, 0.003, 0.0075, 0.02, 0.1, 0.5] {
            let h = 1e-5 * r;
            let fd = (s.smeared(r + h, 14.0, u1) - s.smeared(r - h, 14.0, u1)) / (2.0 * h);
            let an = s.smeared_derivative(r, 14.0, u1);
            assert!((fd - an).abs() <= 1e-6 * an.abs(), "r={r}: {fd} vs {an}");
        }
    }

    #[test]
    fn smeared_derivative_near_origin() {
        // reference slopes from 40-digit evaluation of the closed form
        let (mu, s) = (15.463_917_525_773_194, 0.0075);
        let cases = [
            (1e-7, -0.062_307_367_469_991_84),
            (1e-6, -0.623_073_671_386_012_9),
            (1e-4, -62.304_020_200_549_45),
            (2.2e-4, -137.040_571_032_784_5),
        ];
        for (r, want) in cases {
            let got = smeared_yukawa_derivative(r, mu, s);
            assert!((got / want - 1.0).abs() < 2e-8, "r={r}: {got}");
        }
    }

    #[test]
    fn smeared_transform_matches_quadrature() {
        let s = si();
        let u1 = 0.0075;
        let quad = Quadrature::new(0.0, 1e-12).with_max_intervals(20000);
        let pts: Vec<f64> = (0..=600).map(|i| i as f64 * 3.0 / 600.0).collect();
        for &k in &[1.0, 50.0, 400.0] {
            let est = quad
                .integrate_breaks(|r| 4.0 * PI * r * r * sinc(k * r) * s.smeared(r, 1.0, u1), &pts)
                .unwrap();
            let ft = s.smeared_fourier(k, 1.0, u1);
            assert!((est.value / ft - 1.0).abs() < 1e-7, "k={k}");
            let ratio = ft / s.unregularized().fourier(k, 1.0);
            assert!((ratio / (-0.5 * k * k * u1 * u1).exp() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn plane_average_matches_radial_quadrature() {
        let s = si();
        let u1 = 0.0075;
        let quad = Quadrature::new(0.0, 1e-12);
        for &x in &[0.0, 0.004, 0.03, 0.1] {
            let est = quad
                .integrate_to_infinity(|r| 2.0 * PI * r * s.smeared(r, 14.0, u1), x, 0.02)
                .unwrap();
            let pl = s.smeared_plane(x, 14.0, u1);
            assert!((est.value / pl - 1.0).abs() < 1e-8, "x={x}");
            let h = 1e-6;
            let fd = (s.smeared_plane(x + h, 14.0, u1) - s.smeared_plane(x - h, 14.0, u1)) / (2.0 * h);
            assert!((fd - s.smeared_plane_derivative(x, 14.0, u1)).abs() < 1e-5 * fd.abs().max(1.0));
        }
    }
}
