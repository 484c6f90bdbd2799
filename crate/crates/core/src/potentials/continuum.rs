//! Continuum (Lindhard) potential: thermally smeared atoms averaged over
//! planes or strings.

use super::screening::ScreeningModel;
use crate::error::{Error, Result};
use crate::model::{ChannelGeometry, CrystalModel};
use crate::numerics::{CubicSpline, PeriodicSpline};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumOptions {
    /// Planar table nodes per channel period.
    pub points_per_period: usize,
    /// Axial string-profile node spacing in units of u1.
    pub profile_step_u1: f64,
    /// Override of the thermal width used for smearing.
    pub u1_override: Option<f64>,
}

impl Default for ContinuumOptions {
    fn default() -> Self {
        Self {
            points_per_period: 400,
            profile_step_u1: 0.125,
            u1_override: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Table {
    Planar {
        spline: PeriodicSpline,
    },
    Axial {
        profile: CubicSpline,
        cutoff: f64,
        cell: [f64; 2],
        /// String sites including all periodic images that can reach the cell.
        sites: Vec<[f64; 2]>,
        period: f64,
    },
}

/// Tabulated continuum potential of a unit positive charge, eV.
#[derive(Debug, Clone)]
pub struct ContinuumPotential {
    table: Table,
    v_min: f64,
    v_max: f64,
    arg_min: [f64; 2],
    arg_max: [f64; 2],
    max_curvature: f64,
}

impl ContinuumPotential {
    pub fn is_planar(&self) -> bool {
        matches!(self.table, Table::Planar { .. })
    }

    /// Planar period or axial cell.
    pub fn period(&self) -> [f64; 2] {
        match &self.table {
            Table::Planar { spline } => [spline.period(), f64::INFINITY],
            Table::Axial { cell, .. } => *cell,
        }
    }

    /// Channel depth U0 = max - min, eV.
    pub fn u0_ev(&self) -> f64 {
        self.v_max - self.v_min
    }

    /// Raw potential of a unit positive charge, eV.
    pub fn potential_ev(&self, x: [f64; 2]) -> f64 {
        self.potential_and_gradient(x).0
    }

    /// Gradient of the raw potential, eV/nm.
    pub fn gradient_ev_per_nm(&self, x: [f64; 2]) -> [f64; 2] {
        self.potential_and_gradient(x).1
    }

    pub fn potential_and_gradient(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        match &self.table {
            Table::Planar { spline } => {
                let (v, d) = spline.eval_with_derivative(x[0]);
                (v, [d, 0.0])
            }
            Table::Axial {
                profile,
                cutoff,
                cell,
                sites,
                period,
            } => {
                let px = x[0].rem_euclid(cell[0]);
                let py = x[1].rem_euclid(cell[1]);
                let c2 = cutoff * cutoff;
                let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
                for s in sites {
                    let dx = px - s[0];
                    let dy = py - s[1];
                    let r2 = dx * dx + dy * dy;
                    if r2 >= c2 {
                        continue;
                    }
                    let r = r2.sqrt();
                    let (p, dp) = profile.eval_with_derivative(r);
                    v += p;
                    if r > 0.0 {
                        gx += dp * dx / r;
                        gy += dp * dy / r;
                    }
                }
                let inv = 1.0 / period;
                (v * inv, [gx * inv, gy * inv])
            }
        }
    }

    /// Potential energy of a particle with the given charge sign, shifted so
    /// that its minimum is zero, eV.
    pub fn potential_energy_ev(&self, x: [f64; 2], charge_sign: i8) -> f64 {
        let v = self.potential_ev(x);
        if charge_sign > 0 {
            v - self.v_min
        } else {
            self.v_max - v
        }
    }

    /// Force on the particle, -dU/dx, eV/nm.
    pub fn force_ev_per_nm(&self, x: [f64; 2], charge_sign: i8) -> [f64; 2] {
        let g = self.gradient_ev_per_nm(x);
        let s = -(charge_sign as f64);
        [s * g[0], s * g[1]]
    }

    /// Position of the potential-energy minimum for the charge sign.
    pub fn minimum_position(&self, charge_sign: i8) -> [f64; 2] {
        if charge_sign > 0 {
            self.arg_min
        } else {
            self.arg_max
        }
    }

    /// Largest |d2V/dx2| on the table, eV/nm^2.
    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    /// Shortest small-oscillation period in depth for energy `e_mev`, nm.
    pub fn min_oscillation_period(&self, e_mev: f64) -> f64 {
        2.0 * std::f64::consts::PI * (e_mev * 1e6 / self.max_curvature).sqrt()
    }

    /// Planar potential from an arbitrary periodic function, mainly for tests.
    pub fn planar_from_fn<F: Fn(f64) -> f64>(period: f64, n: usize, f: F) -> Result<Self> {
        if n < 8 || !(period > 0.0) {
            return Err(Error::config("continuum", "need at least 8 nodes and a positive period"));
        }
        let y: Vec<f64> = (0..n).map(|i| f(i as f64 * period / n as f64)).collect();
        Ok(Self::from_planar_nodes(period, y))
    }

    fn from_planar_nodes(period: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let h = period / n as f64;
        let spline = PeriodicSpline::new(period, y);
        let nodes = spline.node_values();
        let (mut imin, mut imax) = (0, 0);
        for i in 0..n {
            if nodes[i] < nodes[imin] {
                imin = i;
            }
            if nodes[i] > nodes[imax] {
                imax = i;
            }
        }
        let refine = |i: usize, sign: f64| -> (f64, f64) {
            // Newton on the spline derivative within the neighbouring cells
            let mut x = i as f64 * h;
            for _ in 0..30 {
                let d = spline.derivative(x);
                let c = spline.second_derivative(x);
                if c * sign <= 0.0 {
                    break;
                }
                let step = (d / c).clamp(-h, h);
                x -= step;
                if step.abs() < 1e-15 * period {
                    break;
                }
            }
            let v = spline.eval(x);
            if sign * v <= sign * nodes[i] {
                (x, v)
            } else {
                (i as f64 * h, nodes[i])
            }
        };
        let (xmin, vmin) = refine(imin, 1.0);
        let (xmax, vmax) = refine(imax, -1.0);
        let max_curvature = spline.max_abs_second_derivative();
        ContinuumPotential {
            table: Table::Planar { spline },
            v_min: vmin,
            v_max: vmax,
            arg_min: [xmin.rem_euclid(period), 0.0],
            arg_max: [xmax.rem_euclid(period), 0.0],
            max_curvature,
        }
    }
}

/// Builds the continuum potential for the crystal geometry.
pub fn build_continuum(crystal: &CrystalModel, s: &ScreeningModel) -> Result<ContinuumPotential> {
    build_continuum_with(crystal, s, ContinuumOptions::default())
}

pub fn build_continuum_with(
    crystal: &CrystalModel,
    s: &ScreeningModel,
    opts: ContinuumOptions,
) -> Result<ContinuumPotential> {
    let u1 = opts.u1_override.unwrap_or(crystal.u1_nm);
    if !(u1 > 0.0) {
        return Err(Error::config("crystal.u1_nm", "thermal width must be positive"));
    }
    let z = crystal.z as f64;
    let cutoff = 25.0 / s.mu_min();
    match &crystal.geometry {
        ChannelGeometry::Planar {
            spacing_nm,
            areal_density_nm2,
            ..
        } => {
            let d = *spacing_nm;
            let n = opts.points_per_period;
            let h = d / n as f64;
            if n < 200 || h > u1 / 4.0 {
                return Err(Error::config(
                    "continuum.points_per_period",
                    format!("{n} nodes give spacing {h:.3e} nm; need >= 200 nodes and spacing <= u1/4"),
                ));
            }
            let jmax = (cutoff / d).ceil() as i64 + 1;
            let y: Vec<f64> = (0..n)
                .map(|i| {
                    let x = i as f64 * h;
                    (-jmax..=jmax)
                        .map(|j| s.smeared_plane(x - j as f64 * d, z, u1))
                        .sum::<f64>()
                        * areal_density_nm2
                })
                .collect();
            Ok(ContinuumPotential::from_planar_nodes(d, y))
        }
        ChannelGeometry::Axial {
            cell_nm,
            strings_nm,
            period_nm,
            ..
        } => {
            let step = opts.profile_step_u1 * u1;
            if step > u1 / 4.0 || !(step > 0.0) {
                return Err(Error::config(
                    "continuum.profile_step_u1",
                    "string profile spacing must not exceed u1/4",
                ));
            }
            let half = (cutoff / step).ceil() as usize;
            let mut vals = vec![0.0; half + 1];
            for (i, v) in vals.iter_mut().enumerate() {
                *v = s.smeared_string(i as f64 * step, z, u1)?;
            }
            let tail = vals[half];
            let mut xs = Vec::with_capacity(2 * half + 1);
            let mut ys = Vec::with_capacity(2 * half + 1);
            for i in -(half as i64)..=(half as i64) {
                xs.push(i as f64 * step);
                ys.push(vals[i.unsigned_abs() as usize] - tail);
            }
            let profile = CubicSpline::natural(xs, ys);
            let cut = half as f64 * step;
            let diag = (cell_nm[0] * cell_nm[0] + cell_nm[1] * cell_nm[1]).sqrt();
            let reach = cut + diag;
            let mx = (reach / cell_nm[0]).ceil() as i64;
            let my = (reach / cell_nm[1]).ceil() as i64;
            let mut sites = Vec::new();
            for st in strings_nm {
                for i in -mx..=mx {
                    for j in -my..=my {
                        let p = [st[0] + i as f64 * cell_nm[0], st[1] + j as f64 * cell_nm[1]];
                        // keep images within reach of any point of the cell
                        let cx = p[0].clamp(0.0, cell_nm[0]);
                        let cy = p[1].clamp(0.0, cell_nm[1]);
                        if ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt() < cut {
                            sites.push(p);
                        }
                    }
                }
            }
            let max_curvature = profile.max_abs_second_derivative() / period_nm;
            let mut pot = ContinuumPotential {
                table: Table::Axial {
                    profile,
                    cutoff: cut,
                    cell: *cell_nm,
                    sites,
                    period: *period_nm,
                },
                v_min: 0.0,
                v_max: 0.0,
                arg_min: [0.0; 2],
                arg_max: [0.0; 2],
                max_curvature,
            };
            let (arg_min, v_min, arg_max, v_max) = axial_extrema(&pot, *cell_nm, strings_nm);
            pot.v_min = v_min;
            pot.v_max = v_max;
            pot.arg_min = arg_min;
            pot.arg_max = arg_max;
            Ok(pot)
        }
    }
}

fn axial_extrema(p: &ContinuumPotential, cell: [f64; 2], strings: &[[f64; 2]]) -> ([f64; 2], f64, [f64; 2], f64) {
    let n = 96;
    let (mut amin, mut vmin) = ([0.0; 2], f64::INFINITY);
    let (mut amax, mut vmax) = ([0.0; 2], f64::NEG_INFINITY);
    let consider = |x: [f64; 2], amin: &mut [f64; 2], vmin: &mut f64, amax: &mut [f64; 2], vmax: &mut f64| {
        let v = p.potential_ev(x);
        if v < *vmin {
            *vmin = v;
            *amin = x;
        }
        if v > *vmax {
            *vmax = v;
            *amax = x;
        }
    };
    for s in strings {
        consider(*s, &mut amin, &mut vmin, &mut amax, &mut vmax);
    }
    for i in 0..n {
        for j in 0..n {
            let x = [(i as f64 + 0.5) * cell[0] / n as f64, (j as f64 + 0.5) * cell[1] / n as f64];
            consider(x, &mut amin, &mut vmin, &mut amax, &mut vmax);
        }
    }
    // local pattern search around the minimum
    let mut step = cell[0].min(cell[1]) / n as f64;
    while step > 1e-9 {
        let mut moved = false;
        for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]] {
            let x = [amin[0] + step * d[0], amin[1] + step * d[1]];
            let v = p.potential_ev(x);
            if v < vmin {
                vmin = v;
                amin = x;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (amin, vmin, amax, vmax)
}
