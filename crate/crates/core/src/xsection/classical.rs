//! Eikonal (straight-line) momentum transfers and the classical cross
//! section obtained by transporting the impact-parameter area through the
//! map b -> q_cl(b).

use serde::{Deserialize, Serialize};

use super::table::{DifferentialXS, QGrid, ThornDescriptor};
use crate::error::{Error, Result};
use crate::numerics::quad::{GL4_NODES, GL4_WEIGHTS};
use crate::numerics::CubicSpline;
use crate::potentials::{RadialShape, Thorn};
use crate::units::EV_PER_MEV;

const PI: f64 = std::f64::consts::PI;

/// Eikonal transfer q_cl(b) in MeV for a straight path along z at
/// transverse position b (nm), by adaptive line quadrature.
pub fn classical_kick(b: [f64; 2], thorn: &Thorn) -> Result<[f64; 2]> {
    thorn.kick(b)
}

/// Interpolated outward kick magnitude of one radial shape, eV.
///
/// ln |b k(b)| is splined against ln b on a log grid (b k(b) itself if the
/// kick changes sign); below the grid the kick follows the power law of the
/// first two nodes, above it the bare c/r tail.
#[derive(Debug, Clone)]
pub struct KickTable {
    spline: CubicSpline,
    /// Sign of the kick when the spline holds logarithms.
    log_sign: Option<f64>,
    b_lo: f64,
    b_hi: f64,
    k_lo: f64,
    slope_lo: f64,
    tail: f64,
}

impl KickTable {
    pub fn new(shape: &RadialShape, per_decade: usize) -> Result<Self> {
        let inner = shape.inner_scale();
        let core = shape.core_radius();
        let small = if core > 0.0 { core.min(inner) } else { inner };
        let b_lo = 1e-3 * small;
        let b_hi = shape.outer_range().max(10.0 * b_lo);
        Self::with_range(shape, b_lo, b_hi, per_decade)
    }

    pub fn with_range(shape: &RadialShape, b_lo: f64, b_hi: f64, per_decade: usize) -> Result<Self> {
        if !(b_lo > 0.0 && b_hi > b_lo) {
            return Err(Error::domain("kick table needs 0 < b_lo < b_hi"));
        }
        let n = (((b_hi / b_lo).log10() * per_decade as f64).ceil() as usize).max(3);
        let (la, lb) = (b_lo.ln(), b_hi.ln());
        let mut xs: Vec<f64> = (0..=n).map(|i| la + (lb - la) * i as f64 / n as f64).collect();
        // resolve the kink where the path starts to graze a flat core
        let core = shape.core_radius();
        if core > b_lo && core < b_hi {
            let lc = core.ln();
            for d in [-0.2, -0.1, -0.05, -0.02, -0.01, -0.005, -0.002, -0.001, 0.0, 0.002, 0.005, 0.02] {
                xs.push(lc + d);
            }
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-4 * (lb - la) / n as f64);
        }
        let mut ys = Vec::with_capacity(xs.len());
        for &x in &xs {
            let b = x.exp();
            ys.push(b * shape.kick(b)?);
        }
        let k0 = ys[0] / b_lo;
        let b1 = xs[1].exp();
        let k1 = ys[1] / b1;
        let slope_lo = if k0 != 0.0 && k1 != 0.0 && k0.signum() == k1.signum() {
            (k1 / k0).ln() / (b1 / b_lo).ln()
        } else {
            1.0
        };
        let sign = ys[0].signum();
        let log_sign = (sign != 0.0 && ys.iter().all(|&y| y.signum() == sign && y.is_normal())).then_some(sign);
        if log_sign.is_some() {
            for y in &mut ys {
                *y = y.abs().ln();
            }
        }
        Ok(Self {
            spline: CubicSpline::natural(xs, ys),
            log_sign,
            b_lo,
            b_hi,
            k_lo: k0,
            slope_lo,
            tail: shape.tail(),
        })
    }

    #[inline]
    pub fn eval(&self, b: f64) -> f64 {
        if b <= 0.0 {
            0.0
        } else if b < self.b_lo {
            self.k_lo * (b / self.b_lo).powf(self.slope_lo)
        } else if b > self.b_hi {
            2.0 * self.tail / b
        } else {
            let y = self.spline.eval(b.ln());
            match self.log_sign {
                Some(s) => s * y.exp() / b,
                None => y / b,
            }
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.b_lo, self.b_hi)
    }
}

/// A thorn's kick field assembled from per-part tables.
#[derive(Debug, Clone)]
pub struct ThornKicker {
    parts: Vec<([f64; 2], f64, KickTable)>,
}

impl ThornKicker {
    pub fn new(thorn: &Thorn, per_decade: usize) -> Result<Self> {
        let parts = thorn
            .parts
            .iter()
            .map(|p| Ok(([p.center[0], p.center[1]], p.scale, KickTable::new(&p.shape, per_decade)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { parts })
    }

    /// Transfer in MeV at transverse position b.
    #[inline]
    pub fn kick(&self, b: [f64; 2]) -> [f64; 2] {
        let mut q = [0.0; 2];
        for (c, scale, table) in &self.parts {
            let d = [b[0] - c[0], b[1] - c[1]];
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if n == 0.0 {
                continue;
            }
            let k = scale * table.eval(n) / (EV_PER_MEV * n);
            q[0] += k * d[0];
            q[1] += k * d[1];
        }
        q
    }
}

/// Polar impact-parameter grid: log-spaced radii around `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactGrid {
    pub center: [f64; 2],
    pub b_min: f64,
    pub b_max: f64,
    pub per_decade: usize,
    pub n_angle: usize,
}

impl ImpactGrid {
    /// Area of the annulus covered by the grid, nm^2.
    pub fn area(&self) -> f64 {
        PI * (self.b_max * self.b_max - self.b_min * self.b_min)
    }

    /// Gauss–Legendre points (b, area weight) over the annulus.
    pub fn points(&self) -> Vec<([f64; 2], f64)> {
        let n_r = (((self.b_max / self.b_min).log10() * self.per_decade as f64).ceil() as usize).max(1);
        let (la, lb) = (self.b_min.ln(), self.b_max.ln());
        let hr = 0.5 * (lb - la) / n_r as f64;
        let dth = 2.0 * PI / self.n_angle as f64;
        let mut out = Vec::with_capacity(n_r * self.n_angle * 16);
        for i in 0..n_r {
            let cr = la + (2 * i + 1) as f64 * hr;
            for (xr, wr) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                let rho = (cr + hr * xr).exp();
                for j in 0..self.n_angle {
                    let ct = (j as f64 + 0.5) * dth;
                    for (xt, wt) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                        let th = ct + 0.5 * dth * xt;
                        // d^2 b = rho^2 d(ln rho) d(theta)
                        let w = wr * hr * wt * 0.5 * dth * rho * rho;
                        out.push(([self.center[0] + rho * th.cos(), self.center[1] + rho * th.sin()], w));
                    }
                }
            }
        }
        out
    }
}

/// Classical transfers and area weights over an impact grid.
pub fn classical_points(kicker: &ThornKicker, grid: &ImpactGrid) -> Vec<([f64; 2], f64)> {
    grid.points()
        .into_iter()
        .map(|(b, w)| (kicker.kick(b), w))
        .collect()
}

/// Histogram the transported area measure on a q grid. The grid must cover
/// the largest transfer.
pub fn classical_dsigma(
    kicker: &ThornKicker,
    impact: &ImpactGrid,
    q_grid: QGrid,
    descriptor: ThornDescriptor,
) -> Result<DifferentialXS> {
    DifferentialXS::from_points(q_grid, descriptor, classical_points(kicker, impact))
}

/// As [`classical_dsigma`] with the upper grid edge placed just above the
/// largest transfer found on the impact grid.
pub fn classical_dsigma_auto(
    kicker: &ThornKicker,
    impact: &ImpactGrid,
    q_min: f64,
    per_decade: usize,
    n_phi: usize,
    descriptor: ThornDescriptor,
) -> Result<DifferentialXS> {
    let pts = classical_points(kicker, impact);
    let q_top = pts
        .iter()
        .map(|(q, _)| (q[0] * q[0] + q[1] * q[1]).sqrt())
        .fold(0.0, f64::max);
    if !(q_top > q_min) {
        return Err(Error::config("grid.q_min", "all classical transfers fall below q_min"));
    }
    // round the top edge up to a whole number of bins
    let n = ((q_top / q_min).log10() * per_decade as f64 * (1.0 + 1e-12)).ceil();
    let q_max = q_min * 10f64.powf(n / per_decade as f64);
    let grid = QGrid::new(q_min, q_max.max(q_top * (1.0 + 1e-12)), per_decade, n_phi)?;
    DifferentialXS::from_points(grid, descriptor, pts)
}

/// Largest kick magnitude of a central thorn, and where it occurs (MeV, nm).
pub fn max_central_kick(shape: &RadialShape, b_lo: f64, b_hi: f64) -> Result<(f64, f64)> {
    let n = 400;
    let mut best = (0.0, b_lo);
    for i in 0..=n {
        let b = b_lo * (b_hi / b_lo).powf(i as f64 / n as f64);
        let k = shape.kick(b)?.abs() / EV_PER_MEV;
        if k > best.0 {
            best = (k, b);
        }
    }
    // golden-section refinement in ln b
    let (mut a, mut c) = ((best.1 * (b_hi / b_lo).powf(-1.0 / n as f64)).ln(), (best.1 * (b_hi / b_lo).powf(1.0 / n as f64)).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| -> Result<f64> { Ok(shape.kick(t.exp())?.abs() / EV_PER_MEV) };
    let mut x1 = c - g * (c - a);
    let mut x2 = a + g * (c - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..60 {
        if f1 > f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - g * (c - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (c - a);
            f2 = f(x2)?;
        }
    }
    let t = 0.5 * (a + c);
    let v = f(t)?;
    Ok(if v > best.0 { (v, t.exp()) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::bessel_k1;
    use crate::potentials::{OrbitalModel, PhenomenologicalThorn, ScreeningModel, ThornVib};
    use crate::units::{ALPHA, HBAR_C};

    #[test]
    fn yukawa_kick_oracle() {
        let z = 14.0;
        let mu = 60.0;
        let shape = RadialShape::Yukawa { strength: z * crate::units::COULOMB_EV_NM, mu };
        let t = Thorn::single(shape);
        for &b in &[2e-4, 5e-3, 0.03] {
            let q = classical_kick([b * 0.6, b * 0.8], &t).unwrap();
            let mag = (q[0] * q[0] + q[1] * q[1]).sqrt();
            let want = 2.0 * z * ALPHA * HBAR_C * mu * bessel_k1(mu * b);
            assert!((mag / want - 1.0).abs() < 1e-8, "b={b}");
            // along b-hat, outward for a repulsive centre
            assert!((q[0] / mag - 0.6).abs() < 1e-12 && q[0] > 0.0);
        }
    }

    #[test]
    fn coulomb_limit() {
        let t = Thorn::single(RadialShape::Yukawa { strength: crate::units::COULOMB_EV_NM, mu: 1e-7 });
        let b = 0.01;
        let q = classical_kick([b, 0.0], &t).unwrap();
        assert!((q[0] / (2.0 * ALPHA * HBAR_C / b) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn phenomenological_kick_vanishes_at_centre_with_single_maximum() {
        let p = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6).unwrap();
        let shape = p.shape().unwrap();
        assert!(shape.kick(1e-10).unwrap() / shape.kick(3e-6).unwrap() < 1e-3);
        let (kmax, bstar) = max_central_kick(&shape, 1e-8, 0.1).unwrap();
        let scale = 14.0 * ALPHA * HBAR_C / 3e-6;
        assert!(kmax > 0.3 * scale && kmax < 3.0 * scale, "{kmax} vs {scale}");
        assert!(bstar > 0.3e-6 && bstar < 3e-5);
        // unimodal: increasing below b*, decreasing above
        let mut prev = 0.0;
        for i in 1..60 {
            let b = bstar * 10f64.powf(-3.0 + 3.0 * i as f64 / 60.0);
            let k = shape.kick(b).unwrap();
            assert!(k > prev);
            prev = k;
        }
        for i in 1..60 {
            let b = bstar * 10f64.powf(3.0 * i as f64 / 60.0);
            let k = shape.kick(b).unwrap();
            assert!(k < prev);
            prev = k;
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let scr = ScreeningModel::moliere(0.0194, 3e-6);
        let shapes = [
            RadialShape::Atomic { z: 14.0, screening: scr.clone() },
            RadialShape::SmearedAtomic { z: 14.0, screening: scr, u1: 0.0075 },
            RadialShape::Cloud { charge: 1.0, orbital: OrbitalModel::yukawa_shell(60.0) },
            RadialShape::PointCharge { charge: -1.0, r_reg: 1e-7 },
            RadialShape::Phenomenological { z: 14.0, r_max: 0.0075, r_min: 3e-6 },
        ];
        for s in &shapes {
            let t = KickTable::new(s, 64).unwrap();
            for i in 0..37 {
                let b = 1.3e-8 * 10f64.powf(i as f64 * 0.23);
                let core = s.core_radius();
                if (core > 0.0 && (b / core - 1.0).abs() < 0.1) || b < t.range().0 {
                    continue;
                }
                let want = s.kick(b).unwrap();
                let got = t.eval(b);
                let scale = want.abs().max(1e-12 * s.kick(1e-3).unwrap().abs());
                assert!((got - want).abs() <= 1e-6 * scale, "{s:?} b={b}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn area_is_conserved_and_support_is_compact() {
        let p = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6).unwrap();
        let thorn = p.thorn().unwrap();
        let kicker = ThornKicker::new(&thorn, 64).unwrap();
        let impact = ImpactGrid { center: [0.0; 2], b_min: 1e-9, b_max: 0.3, per_decade: 64, n_angle: 64 };
        let xs = classical_dsigma_auto(&kicker, &impact, 1e-6, 64, 16, ThornDescriptor::Other("p".into())).unwrap();
        let area = impact.area();
        assert!(((xs.total() + xs.underflow) / area - 1.0).abs() < 1e-10);
        let (kmax, _) = max_central_kick(&p.shape().unwrap(), 1e-9, 0.3).unwrap();
        assert!(xs.support_edge() <= kmax * 1.03);
        let grid = QGrid::new(1e-6, kmax * 0.5, 64, 16).unwrap();
        assert!(matches!(
            classical_dsigma(&kicker, &impact, grid, ThornDescriptor::Other("p".into())),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn vib_kicker_matches_thorn_kick() {
        let scr = ScreeningModel::moliere(0.0194, 3e-6);
        let t = ThornVib { z: 14.0, screening: scr, u1: 0.0075, u: [0.0075, 0.0, 0.002] }.thorn();
        let k = ThornKicker::new(&t, 64).unwrap();
        for b in [[0.0076, 0.0001], [0.0, 0.01], [-0.02, 0.005], [0.0075, 3e-5]] {
            let a = k.kick(b);
            let d = classical_kick(b, &t).unwrap();
            let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
            assert!(((a[0] - d[0]).powi(2) + (a[1] - d[1]).powi(2)).sqrt() < 1e-6 * n, "b={b:?}");
        }
    }
}
