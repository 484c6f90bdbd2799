//! Tabulated differential cross sections on a (|q|, azimuth) grid.
//!
//! Each bin stores its integrated cross section (nm^2) rather than a point
//! density, so integrable endpoint singularities are represented exactly and
//! sampling reduces to two discrete inverse-CDF lookups.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::{GL4_NODES, GL4_WEIGHTS};

const PI: f64 = std::f64::consts::PI;

/// Logarithmic grid in |q| (MeV) times a uniform azimuth grid on [-pi, pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub per_decade: usize,
    pub n_phi: usize,
}

impl QGrid {
    pub fn new(q_min: f64, q_max: f64, per_decade: usize, n_phi: usize) -> Result<Self> {
        if !(q_min > 0.0 && q_max > q_min && q_max.is_finite()) {
            return Err(Error::config(
                "grid",
                format!("need 0 < q_min < q_max, got [{q_min}, {q_max}]"),
            ));
        }
        if per_decade == 0 || n_phi < 4 || !n_phi.is_multiple_of(4) {
            return Err(Error::config(
                "grid",
                "need per_decade >= 1 and a multiple of 4 azimuth bins",
            ));
        }
        Ok(Self {
            q_min,
            q_max,
            per_decade,
            n_phi,
        })
    }

    /// Default resolution: 256 bins per decade, 64 azimuth bins.
    pub fn standard(q_min: f64, q_max: f64) -> Result<Self> {
        Self::new(q_min, q_max, 256, 64)
    }

    pub fn n_q(&self) -> usize {
        ((self.q_max / self.q_min).log10() * self.per_decade as f64).ceil().max(1.0) as usize
    }

    pub fn q_edges(&self) -> Vec<f64> {
        let n = self.n_q();
        let (la, lb) = (self.q_min.ln(), self.q_max.ln());
        (0..=n)
            .map(|i| match i {
                0 => self.q_min,
                i if i == n => self.q_max,
                i => (la + (lb - la) * i as f64 / n as f64).exp(),
            })
            .collect()
    }

    pub fn phi_width(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }
}

/// What a table was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThornDescriptor {
    Atom { u_t: [f64; 2], u1: f64 },
    Electron { s_t: [f64; 2], shell: usize },
    Spherical { z_eff: f64, r_max: f64, r_min: f64 },
    Other(String),
}

/// Per-bin integrals of q_x, q_y, their products and |q| weighted by the
/// cross section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMoments {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub qxx: Vec<f64>,
    pub qyy: Vec<f64>,
    pub qxy: Vec<f64>,
    pub q_abs: Vec<f64>,
}

impl BinMoments {
    fn zeros(n: usize) -> Self {
        Self {
            qx: vec![0.0; n],
            qy: vec![0.0; n],
            qxx: vec![0.0; n],
            qyy: vec![0.0; n],
            qxy: vec![0.0; n],
            q_abs: vec![0.0; n],
        }
    }

    #[inline]
    fn add(&mut self, i: usize, q: [f64; 2], w: f64) {
        self.qx[i] += w * q[0];
        self.qy[i] += w * q[1];
        self.qxx[i] += w * q[0] * q[0];
        self.qyy[i] += w * q[1] * q[1];
        self.qxy[i] += w * q[0] * q[1];
        self.q_abs[i] += w * (q[0] * q[0] + q[1] * q[1]).sqrt();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialXS {
    pub grid: QGrid,
    pub descriptor: ThornDescriptor,
    q_edges: Vec<f64>,
    /// Bin cross sections, row-major in (q, phi), nm^2.
    mass: Vec<f64>,
    moments: Option<BinMoments>,
    /// Normalised cumulative row masses.
    row_cdf: Vec<f64>,
    total: f64,
    /// Cross section that fell below `q_min` (classical tables only).
    pub underflow: f64,
}

impl DifferentialXS {
    fn finish(grid: QGrid, descriptor: ThornDescriptor, q_edges: Vec<f64>, mass: Vec<f64>, moments: Option<BinMoments>, underflow: f64) -> Self {
        let n_phi = grid.n_phi;
        let mut row_cdf = Vec::with_capacity(q_edges.len() - 1);
        let mut acc = 0.0;
        for row in mass.chunks(n_phi) {
            acc += row.iter().sum::<f64>();
            row_cdf.push(acc);
        }
        let total = acc;
        if total > 0.0 {
            for c in &mut row_cdf {
                *c /= total;
            }
        }
        Self {
            grid,
            descriptor,
            q_edges,
            mass,
            moments,
            row_cdf,
            total,
            underflow,
        }
    }

    /// Tabulate a density dσ/d²q (nm^2/MeV^2) given as a function of (|q|, phi).
    ///
    /// `phase_rate(q)` bounds |d(phase)/d(phi)| of any oscillating factor in
    /// the density at transfer q; bins are subdivided in phi accordingly.
    pub fn from_density<F, P>(grid: QGrid, descriptor: ThornDescriptor, density: F, phase_rate: P, with_moments: bool) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
        P: Fn(f64) -> f64,
    {
        let edges = grid.q_edges();
        let n_q = edges.len() - 1;
        let n_phi = grid.n_phi;
        let dphi = grid.phi_width();
        let mut mass = vec![0.0; n_q * n_phi];
        let mut moments = with_moments.then(|| BinMoments::zeros(n_q * n_phi));
        for iq in 0..n_q {
            let (l0, l1) = (edges[iq].ln(), edges[iq + 1].ln());
            let hl = 0.5 * (l1 - l0);
            let cl = 0.5 * (l1 + l0);
            let n_sub = (phase_rate(edges[iq + 1]) * dphi / 1.5).ceil().clamp(1.0, 64.0) as usize;
            let sub = dphi / n_sub as f64;
            for ip in 0..n_phi {
                let phi0 = -PI + ip as f64 * dphi;
                let bin = iq * n_phi + ip;
                let mut m = 0.0;
                for s in 0..n_sub {
                    let c_phi = phi0 + (s as f64 + 0.5) * sub;
                    for (xa, wa) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                        let q = (cl + hl * xa).exp();
                        for (xb, wb) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
                            let phi = c_phi + 0.5 * sub * xb;
                            let d = density(q, phi);
                            if !(d >= 0.0) {
                                return Err(Error::domain(format!(
                                    "negative or undefined density {d} at q = {q}, phi = {phi}"
                                )));
                            }
                            // d^2 q = q^2 d(ln q) d(phi)
                            let w = wa * wb * hl * 0.5 * sub * q * q * d;
                            m += w;
                            if let Some(mo) = moments.as_mut() {
                                mo.add(bin, [q * phi.cos(), q * phi.sin()], w);
                            }
                        }
                    }
                }
                mass[bin] = m;
            }
        }
        Ok(Self::finish(grid, descriptor, edges, mass, moments, 0.0))
    }

    /// Histogram weighted transfer points (q vector in MeV, weight in nm^2),
    /// as produced by transporting an impact-parameter measure.
    pub fn from_points<I>(grid: QGrid, descriptor: ThornDescriptor, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([f64; 2], f64)>,
    {
        let edges = grid.q_edges();
        let n_q = edges.len() - 1;
        let n_phi = grid.n_phi;
        let mut mass = vec![0.0; n_q * n_phi];
        let mut moments = BinMoments::zeros(n_q * n_phi);
        let mut underflow = 0.0;
        let (la, lb) = (grid.q_min.ln(), grid.q_max.ln());
        let dphi = grid.phi_width();
        for (q, w) in points {
            let qa = (q[0] * q[0] + q[1] * q[1]).sqrt();
            if qa < grid.q_min {
                underflow += w;
                continue;
            }
            if qa > grid.q_max {
                return Err(Error::config(
                    "grid.q_max",
                    format!("transfer {qa:.6e} MeV lies beyond the grid edge {:.6e} MeV", grid.q_max),
                ));
            }
            let iq = (((qa.ln() - la) / (lb - la) * n_q as f64) as usize).min(n_q - 1);
            // guard the rounding at bin edges
            let iq = if qa < edges[iq] { iq.saturating_sub(1) } else if qa >= edges[iq + 1] && iq + 1 < n_q { iq + 1 } else { iq };
            let phi = q[1].atan2(q[0]);
            let ip = (((phi + PI) / dphi) as usize).min(n_phi - 1);
            let bin = iq * n_phi + ip;
            mass[bin] += w;
            moments.add(bin, q, w);
        }
        Ok(Self::finish(grid, descriptor, edges, mass, Some(moments), underflow))
    }

    pub fn n_q(&self) -> usize {
        self.q_edges.len() - 1
    }

    pub fn n_phi(&self) -> usize {
        self.grid.n_phi
    }

    pub fn q_edges(&self) -> &[f64] {
        &self.q_edges
    }

    /// Left edge of azimuth bin `ip`.
    pub fn phi_edge(&self, ip: usize) -> f64 {
        -PI + ip as f64 * self.grid.phi_width()
    }

    /// Total cross section on the grid, nm^2.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn bin_mass(&self, iq: usize, ip: usize) -> f64 {
        self.mass[iq * self.grid.n_phi + ip]
    }

    /// Cross section in each |q| row (the radial marginal), nm^2.
    pub fn row_masses(&self) -> Vec<f64> {
        self.mass.chunks(self.grid.n_phi).map(|r| r.iter().sum()).collect()
    }

    /// Azimuth-averaged dσ/d²q per row, nm^2/MeV^2.
    pub fn row_density(&self) -> Vec<f64> {
        self.row_masses()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (a, b) = (self.q_edges[i], self.q_edges[i + 1]);
                m / (PI * (b * b - a * a))
            })
            .collect()
    }

    /// Mean dσ/d²q over one bin.
    pub fn bin_density(&self, iq: usize, ip: usize) -> f64 {
        let (a, b) = (self.q_edges[iq], self.q_edges[iq + 1]);
        self.bin_mass(iq, ip) / (0.5 * self.grid.phi_width() * (b * b - a * a))
    }

    pub fn moments(&self) -> Option<&BinMoments> {
        self.moments.as_ref()
    }

    fn require_moments(&self) -> Result<&BinMoments> {
        self.moments
            .as_ref()
            .ok_or_else(|| Error::domain("table was built without moment accumulators"))
    }

    /// (integral of q dσ, integral of |q| dσ), MeV nm^2.
    pub fn first_moment(&self) -> Result<([f64; 2], f64)> {
        let m = self.require_moments()?;
        Ok((
            [m.qx.iter().sum(), m.qy.iter().sum()],
            m.q_abs.iter().sum(),
        ))
    }

    /// Integral of q^2 dσ, MeV^2 nm^2.
    pub fn second_moment(&self) -> Result<f64> {
        let m = self.require_moments()?;
        Ok(m.qxx.iter().sum::<f64>() + m.qyy.iter().sum::<f64>())
    }

    /// Integral of (q . n)^2 dσ for the unit direction n at angle `angle`.
    pub fn directional_second_moment(&self, angle: f64) -> Result<f64> {
        let m = self.require_moments()?;
        let (s, c) = angle.sin_cos();
        let xx: f64 = m.qxx.iter().sum();
        let yy: f64 = m.qyy.iter().sum();
        let xy: f64 = m.qxy.iter().sum();
        Ok(c * c * xx + s * s * yy + 2.0 * s * c * xy)
    }

    /// Largest |q| edge of a non-empty row, MeV.
    pub fn support_edge(&self) -> f64 {
        let rows = self.row_masses();
        match rows.iter().rposition(|&m| m > 0.0) {
            Some(i) => self.q_edges[i + 1],
            None => 0.0,
        }
    }

    /// Draw a transfer in the table frame: |q| row from the marginal, then
    /// the azimuth bin from the row, then a point uniform in d^2 q inside
    /// the bin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2]> {
        if !(self.total > 0.0) {
            return Err(Error::domain("cannot sample a cross section with zero total"));
        }
        let u: f64 = rng.gen();
        let iq = self.row_cdf.partition_point(|&c| c <= u).min(self.n_q() - 1);
        let n_phi = self.grid.n_phi;
        let row = &self.mass[iq * n_phi..(iq + 1) * n_phi];
        let row_total: f64 = row.iter().sum();
        let mut target = rng.gen::<f64>() * row_total;
        let mut ip = n_phi - 1;
        for (j, &m) in row.iter().enumerate() {
            if target < m {
                ip = j;
                break;
            }
            target -= m;
        }
        // a zero-mass row can only be hit through rounding at the CDF top
        if row_total == 0.0 {
            ip = rng.gen_range(0..n_phi);
        }
        let (a, b) = (self.q_edges[iq], self.q_edges[iq + 1]);
        let q = (a * a + rng.gen::<f64>() * (b * b - a * a)).sqrt();
        let phi = self.phi_edge(ip) + rng.gen::<f64>() * self.grid.phi_width();
        Ok([q * phi.cos(), q * phi.sin()])
    }

    /// Draw a transfer and rotate it from the table frame (reference axis
    /// along x) to a frame where the reference axis points at `angle`.
    pub fn sample_rotated<R: Rng + ?Sized>(&self, rng: &mut R, angle: f64) -> Result<[f64; 2]> {
        Ok(rotate(self.sample(rng)?, angle))
    }
}

#[inline]
pub fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_table() -> DifferentialXS {
        let grid = QGrid::new(1e-3, 10.0, 64, 16).unwrap();
        DifferentialXS::from_density(
            grid,
            ThornDescriptor::Other("gaussian".into()),
            |q, phi| (-q * q).exp() * (1.0 + 0.5 * phi.cos()),
            |_| 0.0,
            true,
        )
        .unwrap()
    }

    #[test]
    fn bin_masses_integrate_density() {
        let t = gaussian_table();
        // integral of exp(-q^2) (1 + cos/2) d^2 q over [1e-3, 10]
        let want = PI * ((-1e-6f64).exp() - (-100f64).exp());
        assert!((t.total() / want - 1.0).abs() < 1e-10);
        let (m1, _) = t.first_moment().unwrap();
        // <q cos phi> picks up the cos term: (1/2) pi integral q^2 e^{-q^2} dq
        let want_x = 0.5 * PI * (PI.sqrt() / 4.0);
        assert!((m1[0] / want_x - 1.0).abs() < 1e-6);
        assert!(m1[1].abs() < 1e-14);
    }

    #[test]
    fn rejects_points_beyond_grid() {
        let grid = QGrid::new(1e-2, 1.0, 16, 8).unwrap();
        let r = DifferentialXS::from_points(grid, ThornDescriptor::Other("x".into()), vec![([2.0, 0.0], 1.0)]);
        assert!(matches!(r, Err(Error::Config { .. })));
        let t = DifferentialXS::from_points(grid, ThornDescriptor::Other("x".into()), vec![([1e-3, 0.0], 1.0), ([0.5, 0.0], 2.0)]).unwrap();
        assert_eq!(t.underflow, 1.0);
        assert_eq!(t.total(), 2.0);
    }

    #[test]
    fn zero_table_refuses_to_sample() {
        let grid = QGrid::new(1e-2, 1.0, 16, 8).unwrap();
        let t = DifferentialXS::from_points(grid, ThornDescriptor::Other("x".into()), Vec::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(t.sample(&mut rng).is_err());
    }

    #[test]
    fn samples_stay_inside_grid() {
        let t = gaussian_table();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10000 {
            let q = t.sample(&mut rng).unwrap();
            let a = (q[0] * q[0] + q[1] * q[1]).sqrt();
            assert!((1e-3..=10.0).contains(&a));
        }
    }

    #[test]
    fn rotation_preserves_length() {
        let v = rotate([3.0, 4.0], 0.7);
        assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 5.0).abs() < 1e-14);
    }
}
