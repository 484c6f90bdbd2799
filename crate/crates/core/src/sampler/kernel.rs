//! Collision kernel of the semi-classical model: per-site collision
//! probabilities built from tabulated thorn cross sections, the schedule of
//! site encounters along a trajectory, and the draw of the kink.
//!
//! A component is either the vibrating atom or one electron shell. For each
//! component c the kernel tabulates the probability P_c(d) that an atom whose
//! mean transverse position lies at offset d = r_T - R_T from the particle
//! produces a collision. Planar channels see a Poisson stream of atoms with
//! areal density n_a in every plane; axial channels meet each string atom
//! once per period.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{Beyond, RadialTable};
use crate::error::{Error, Result};
use crate::model::{ChannelGeometry, CrystalModel};
use crate::numerics::quad::log_breaks;
use crate::numerics::special::bessel_i0_scaled;
use crate::numerics::{PeriodicSpline, Quadrature};
use crate::units::HBAR_C;
use crate::xsection::born::{atom_table, electron_table_smoothed, sigma_atom_window, sigma_electron_window, KWindow};
use crate::xsection::dech::electron_q_max;
use crate::xsection::{rotate, DifferentialXS, FormFactorModel, QGrid};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelOptions {
    /// Log-spaced |q| rows per decade in the conditional transfer tables.
    pub q_per_decade: usize,
    pub n_phi: usize,
    /// Nodes of the sigma(|u_T|), sigma_k(|s_T|) and probability interpolants.
    pub sigma_nodes: usize,
    /// |u_T| nodes carrying an atom transfer table.
    pub vib_table_nodes: usize,
    /// |s_T| nodes carrying an electron transfer table, per shell.
    pub electron_table_nodes: usize,
    pub include_vib: bool,
    pub include_electrons: bool,
    /// Common factor on every collision probability.
    pub rate_scale: f64,
    /// Fringe phase above which electron tables use the azimuthal mean.
    pub max_phase: f64,
    /// Planar rate-profile nodes per channel period.
    pub rate_nodes: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            q_per_decade: 64,
            n_phi: 64,
            sigma_nodes: 64,
            vib_table_nodes: 25,
            electron_table_nodes: 16,
            include_vib: true,
            include_electrons: true,
            rate_scale: 1.0,
            max_phase: 40.0,
            rate_nodes: 512,
        }
    }
}

impl KernelOptions {
    /// Coarser transfer tables for quick runs and tests.
    pub fn coarse() -> Self {
        Self {
            q_per_decade: 24,
            n_phi: 32,
            vib_table_nodes: 13,
            electron_table_nodes: 8,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionKind {
    Vib,
    Electron,
}

impl CollisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CollisionKind::Vib => "vib",
            CollisionKind::Electron => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub kind: CollisionKind,
    pub shell: Option<usize>,
    /// Transfer in the lab transverse frame, MeV.
    pub q: [f64; 2],
    /// Thorn parameter of the draw: u_T for the atom, s_T for an electron.
    pub offset: [f64; 2],
    /// Particle minus mean site, r_T - R_T.
    pub site_offset: [f64; 2],
    /// The nucleus sat more than 3 u1 from its mean site.
    pub strained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    /// Transfer windows, MeV.
    pub vib_window: [f64; 2],
    pub electron_window: [f64; 2],
    /// Share of the point-electron Rutherford cross section above the
    /// kinematic cap, dropped from the electron tables.
    pub electron_cap_loss: f64,
    /// Encounter rate bound used for thinning, nm^-1 (planar only).
    pub majorant: f64,
}

/// Transfer tables at a ladder of thorn parameters; a draw at an
/// intermediate parameter picks one of the two neighbouring tables with
/// linear weights.
#[derive(Debug, Clone)]
struct NodeTables {
    nodes: Vec<f64>,
    tables: Vec<DifferentialXS>,
}

impl NodeTables {
    fn sample<R: Rng + ?Sized>(&self, r: f64, rng: &mut R) -> Result<[f64; 2]> {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&v| v <= r);
        let idx = if i == 0 {
            0
        } else if i >= n {
            n - 1
        } else {
            let (a, b) = (self.nodes[i - 1], self.nodes[i]);
            if rng.gen::<f64>() * (b - a) < r - a {
                i
            } else {
                i - 1
            }
        };
        self.tables[idx].sample(rng)
    }
}

#[derive(Debug, Clone)]
struct Component {
    kind: CollisionKind,
    shell: Option<usize>,
    /// Largest site offset |d| considered, nm.
    range: f64,
    /// P_c(d) for electrons (occupation included); empty for the atom.
    density: Option<RadialTable>,
    /// Upper bound of P_c over [d, range], on a uniform grid.
    envelope: Vec<f64>,
    tables: NodeTables,
}

#[derive(Debug, Clone)]
enum Sites {
    Planar {
        spacing: f64,
        /// Integral of P_c along a line in the plane at distance |dx|.
        line_weight: Vec<RadialTable>,
        /// n_a sum_j line_weight(x - x_j) per component.
        rates: Vec<PeriodicSpline>,
        majorant: f64,
    },
    Axial {
        cell: [f64; 2],
        strings: Vec<[f64; 2]>,
        period: f64,
    },
}

/// Depth of the next site encounter of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventClock {
    pub next_z: f64,
}

#[derive(Debug, Clone)]
pub struct CollisionKernel {
    u1: f64,
    ff: FormFactorModel,
    opts: KernelOptions,
    sigma_vib: RadialTable,
    sigma_e: Vec<RadialTable>,
    sigma_e_max: Vec<f64>,
    comps: Vec<Component>,
    sites: Sites,
    diagnostics: KernelDiagnostics,
}

fn gauss2(d2: f64, u1: f64) -> f64 {
    (-0.5 * d2 / (u1 * u1)).exp() / (2.0 * PI * u1 * u1)
}

fn suffix_envelope<F: Fn(f64) -> f64>(f: F, range: f64, n: usize) -> Vec<f64> {
    let h = range / (n - 1) as f64;
    let mut env: Vec<f64> = (0..n).map(|i| f(i as f64 * h).max(0.0)).collect();
    for i in (0..n - 1).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    // between samples the interpolants can overshoot slightly
    env.iter().map(|v| 1.1 * v).collect()
}

impl CollisionKernel {
    pub fn build(crystal: &CrystalModel, ff: &FormFactorModel, energy: f64, mass: f64, opts: KernelOptions) -> Result<Self> {
        crystal.validate()?;
        if !(opts.rate_scale >= 0.0 && opts.rate_scale.is_finite()) {
            return Err(Error::config("kernel.rate_scale", "must be finite and non-negative"));
        }
        if opts.sigma_nodes < 8 || opts.vib_table_nodes < 2 || opts.electron_table_nodes < 2 {
            return Err(Error::config("kernel", "too few interpolation nodes"));
        }
        let u1 = crystal.u1_nm;
        if !(crystal.r_n_nm > 0.0) {
            return Err(Error::config("crystal.r_n_nm", "the atom tables need a nuclear radius"));
        }
        let vib_window = [0.01 * HBAR_C * ff.min_beta(), HBAR_C / crystal.r_n_nm];
        let reach = crystal.lattice_constant_nm;
        let cap = electron_q_max(energy, mass)?;
        let electron_window = [HBAR_C / reach, cap];
        if electron_window[1] <= electron_window[0] {
            return Err(Error::domain("kinematic cap lies below the electron transfer floor"));
        }
        let n = opts.sigma_nodes;

        let vib_range = 8.0 * u1;
        let kw = KWindow::from_mev(vib_window[0], vib_window[1]);
        let sigma_vib = RadialTable::build_par(vib_range, u1, n, Beyond::Clamp, |u| sigma_atom_window(u, ff, u1, kw))?;

        let s_range = reach + 10.0 * u1;
        let kw_e = KWindow::from_mev(electron_window[0], electron_window[1]);
        let mut sigma_e = Vec::with_capacity(ff.shells.len());
        for sh in &ff.shells {
            let s0 = (0.1 / sh.orbital.beta).min(reach);
            sigma_e.push(RadialTable::build_par(s_range, s0, n, Beyond::Clamp, |s| {
                sigma_electron_window(s, &sh.orbital, kw_e)
            })?);
        }
        let sigma_e_max: Vec<f64> = sigma_e.iter().map(|t| t.max_node()).collect();

        let q_grid_vib = QGrid::new(vib_window[0], vib_window[1], opts.q_per_decade, opts.n_phi)?;
        let q_grid_e = QGrid::new(electron_window[0], electron_window[1], opts.q_per_decade, opts.n_phi)?;

        let mut comps = Vec::new();
        if opts.include_vib {
            let sv = &sigma_vib;
            let nodes: Vec<f64> = (0..opts.vib_table_nodes)
                .map(|i| 6.0 * u1 * i as f64 / (opts.vib_table_nodes - 1) as f64)
                .collect();
            let tables = nodes
                .par_iter()
                .map(|&u| atom_table(ff, [u, 0.0], u1, q_grid_vib, false))
                .collect::<Result<Vec<_>>>()?;
            comps.push(Component {
                kind: CollisionKind::Vib,
                shell: None,
                range: vib_range,
                density: None,
                envelope: suffix_envelope(|d| gauss2(d * d, u1) * sv.eval(d), vib_range, 512),
                tables: NodeTables { nodes, tables },
            });
        }
        if opts.include_electrons {
            for (k, sh) in ff.shells.iter().enumerate() {
                let se = &sigma_e[k];
                let orb = sh.orbital;
                let occ = sh.occupation;
                let per_site = |b: f64| -> Result<f64> {
                    if b <= 0.0 {
                        return Ok(0.0);
                    }
                    Ok(occ * se.eval(b) * orb.line_density(b)?)
                };
                let density = RadialTable::build_par(reach, u1, n, Beyond::Zero, |d| {
                    convolve_gaussian(&per_site, d, u1, orb.beta)
                })?;
                let s0 = (0.1 / orb.beta).min(reach);
                let t_max = (s_range / s0).ln_1p();
                let m = opts.electron_table_nodes;
                let nodes: Vec<f64> = (0..m).map(|i| s0 * (t_max * i as f64 / (m - 1) as f64).exp_m1()).collect();
                let tables = nodes
                    .par_iter()
                    .map(|&s| electron_table_smoothed(ff, k, [s, 0.0], q_grid_e, opts.max_phase, false))
                    .collect::<Result<Vec<_>>>()?;
                let envelope = suffix_envelope(|d| density.eval(d), reach, 512);
                comps.push(Component {
                    kind: CollisionKind::Electron,
                    shell: Some(k),
                    range: reach,
                    density: Some(density),
                    envelope,
                    tables: NodeTables { nodes, tables },
                });
            }
        }

        let mut kernel = CollisionKernel {
            u1,
            ff: ff.clone(),
            opts,
            sigma_vib,
            sigma_e,
            sigma_e_max,
            comps,
            sites: Sites::Axial {
                cell: [1.0, 1.0],
                strings: Vec::new(),
                period: 1.0,
            },
            diagnostics: KernelDiagnostics {
                vib_window,
                electron_window,
                electron_cap_loss: (1.0 / (cap * cap)) / (1.0 / (electron_window[0] * electron_window[0])),
                majorant: 0.0,
            },
        };
        kernel.sites = match &crystal.geometry {
            ChannelGeometry::Planar {
                spacing_nm,
                areal_density_nm2,
                ..
            } => kernel.planar_sites(*spacing_nm, *areal_density_nm2)?,
            ChannelGeometry::Axial {
                cell_nm,
                strings_nm,
                period_nm,
                ..
            } => Sites::Axial {
                cell: *cell_nm,
                strings: strings_nm.clone(),
                period: *period_nm,
            },
        };
        if let Sites::Planar { majorant, .. } = kernel.sites {
            kernel.diagnostics.majorant = majorant;
        }
        Ok(kernel)
    }

    fn planar_sites(&self, spacing: f64, areal: f64) -> Result<Sites> {
        let quad = Quadrature::new(1e-300, 1e-8).with_max_intervals(4000);
        let u1 = self.u1;
        let mut line_weight = Vec::with_capacity(self.comps.len());
        for c in 0..self.comps.len() {
            let range = self.comps[c].range;
            let table = RadialTable::build_par(range, u1, self.opts.sigma_nodes, Beyond::Zero, |dx| {
                let ym = (range * range - dx * dx).max(0.0).sqrt();
                if ym == 0.0 {
                    return Ok(0.0);
                }
                let mut pts: Vec<f64> = (0..=16).map(|i| (0.5 * u1 * i as f64).min(ym)).collect();
                pts.extend(log_breaks(8.0 * u1, ym.max(8.0 * u1), 8));
                pts.retain(|&p| p <= ym);
                pts.push(ym);
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                let est = quad.integrate_breaks(|y| self.component_density(c, (dx * dx + y * y).sqrt()), &pts)?;
                Ok(2.0 * est.value)
            })?;
            line_weight.push(table);
        }
        let nodes = self.opts.rate_nodes.max(16);
        let mut rates = Vec::with_capacity(self.comps.len());
        let mut majorant = 0.0;
        for (c, lw) in line_weight.iter().enumerate() {
            let range = self.comps[c].range;
            let reach = (range / spacing).ceil() as i64 + 1;
            let ys: Vec<f64> = (0..nodes)
                .map(|i| {
                    let x = spacing * i as f64 / nodes as f64;
                    let mut acc = 0.0;
                    for j in -reach..=reach {
                        let dx = (x - j as f64 * spacing).abs();
                        if dx <= range {
                            acc += lw.eval(dx);
                        }
                    }
                    areal * acc
                })
                .collect();
            majorant += ys.iter().fold(0.0f64, |a, &b| a.max(b));
            rates.push(PeriodicSpline::new(spacing, ys));
        }
        Ok(Sites::Planar {
            spacing,
            line_weight,
            rates,
            majorant: 1.1 * majorant,
        })
    }

    pub fn options(&self) -> &KernelOptions {
        &self.opts
    }

    pub fn diagnostics(&self) -> KernelDiagnostics {
        self.diagnostics
    }

    pub fn form_factors(&self) -> &FormFactorModel {
        &self.ff
    }

    /// Window-limited total cross section of the atom thorn, nm^2.
    pub fn sigma_vib(&self, abs_u_t: f64) -> f64 {
        self.sigma_vib.eval(abs_u_t)
    }

    /// Window-limited total cross section of one electron of shell k, nm^2.
    pub fn sigma_electron(&self, shell: usize, abs_s_t: f64) -> f64 {
        self.sigma_e[shell].eval(abs_s_t)
    }

    /// Probability that the atom with mean site `mean_site` scatters a
    /// particle passing at `r_t`: the nucleus density on the path times the
    /// atom-thorn cross section at u_T = r_T - R_T.
    pub fn p_vib(&self, r_t: [f64; 2], mean_site: [f64; 2]) -> f64 {
        if !self.opts.include_vib {
            return 0.0;
        }
        let d = [r_t[0] - mean_site[0], r_t[1] - mean_site[1]];
        let d2 = d[0] * d[0] + d[1] * d[1];
        self.opts.rate_scale * gauss2(d2, self.u1) * self.sigma_vib.eval(d2.sqrt())
    }

    /// Probability of an electron collision with an atom whose nucleus sits
    /// at transverse offset b_A from the particle, each shell weighted by
    /// its occupation and projected density.
    pub fn p_e(&self, b_a: [f64; 2]) -> Result<f64> {
        if !self.opts.include_electrons {
            return Ok(0.0);
        }
        let b = (b_a[0] * b_a[0] + b_a[1] * b_a[1]).sqrt();
        let mut acc = 0.0;
        for (k, sh) in self.ff.shells.iter().enumerate() {
            acc += sh.occupation * self.sigma_e[k].eval(b) * sh.orbital.line_density(b)?;
        }
        Ok(self.opts.rate_scale * acc)
    }

    /// [`Self::p_e`] averaged over the thermal position of the nucleus, as a
    /// function of the mean-site offset d = r_T - R_T.
    pub fn p_e_convolved(&self, d: [f64; 2]) -> f64 {
        let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
        self.comps
            .iter()
            .filter(|c| c.kind == CollisionKind::Electron)
            .map(|c| c.density.as_ref().map_or(0.0, |t| t.eval(r)))
            .sum::<f64>()
            * self.opts.rate_scale
    }

    fn component_density(&self, c: usize, d: f64) -> f64 {
        let comp = &self.comps[c];
        if d > comp.range {
            return 0.0;
        }
        match &comp.density {
            Some(t) => t.eval(d).max(0.0),
            None => gauss2(d * d, self.u1) * self.sigma_vib.eval(d),
        }
    }

    fn envelope(&self, c: usize, d: f64) -> f64 {
        let comp = &self.comps[c];
        let n = comp.envelope.len();
        let i = ((d / comp.range * (n - 1) as f64).floor() as usize).min(n - 1);
        comp.envelope[i]
    }

    /// Expected collisions per nm of depth at transverse position x in a
    /// planar channel, per component (atom first, then shells).
    pub fn planar_rates(&self, x: f64) -> Option<Vec<f64>> {
        match &self.sites {
            Sites::Planar { rates, .. } => Some(
                rates
                    .iter()
                    .map(|s| self.opts.rate_scale * s.eval(x).max(0.0))
                    .collect(),
            ),
            Sites::Axial { .. } => None,
        }
    }

    /// Integral of the per-site probability over a line in the plane at
    /// distance |dx| from the particle, per component, nm.
    pub fn line_weight(&self, dx: f64) -> Option<Vec<f64>> {
        match &self.sites {
            Sites::Planar { line_weight, .. } => Some(
                line_weight
                    .iter()
                    .map(|t| self.opts.rate_scale * t.eval(dx.abs()))
                    .collect(),
            ),
            Sites::Axial { .. } => None,
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self.sites, Sites::Planar { .. })
    }

    /// Clock for a trajectory entering at depth `z0`.
    pub fn start_clock<R: Rng + ?Sized>(&self, z0: f64, rng: &mut R) -> EventClock {
        match &self.sites {
            Sites::Planar { majorant, .. } => {
                let m = majorant * self.opts.rate_scale;
                if m > 0.0 && !self.comps.is_empty() {
                    EventClock {
                        next_z: z0 + rng.sample::<f64, _>(Exp1) / m,
                    }
                } else {
                    EventClock { next_z: f64::INFINITY }
                }
            }
            Sites::Axial { period, .. } => {
                if self.comps.is_empty() || self.opts.rate_scale == 0.0 {
                    EventClock { next_z: f64::INFINITY }
                } else {
                    EventClock {
                        next_z: ((z0 / period).floor() + 1.0) * period,
                    }
                }
            }
        }
    }

    /// Resolve the encounter at `clock.next_z` for a particle at transverse
    /// position `r_t`, append any collisions and advance the clock.
    pub fn resolve<R: Rng + ?Sized>(&self, clock: &mut EventClock, r_t: [f64; 2], rng: &mut R, out: &mut Vec<Collision>) -> Result<()> {
        if !clock.next_z.is_finite() {
            return Ok(());
        }
        match &self.sites {
            Sites::Planar {
                spacing,
                line_weight,
                rates,
                majorant,
                ..
            } => {
                let x = r_t[0];
                let local: Vec<f64> = rates.iter().map(|s| s.eval(x).max(0.0)).collect();
                let total: f64 = local.iter().sum();
                let u: f64 = rng.gen::<f64>() * majorant;
                if u < total {
                    let c = pick(&local, u);
                    let dx = self.pick_plane(c, x, *spacing, &line_weight[c], rng);
                    let y = self.pick_in_plane(c, dx, rng)?;
                    out.push(self.collide(c, [dx, y], rng)?);
                }
                clock.next_z += rng.sample::<f64, _>(Exp1) / (majorant * self.opts.rate_scale);
            }
            Sites::Axial { cell, strings, period } => {
                let reach = self.comps.iter().map(|c| c.range).fold(0.0, f64::max);
                let mut probs = vec![0.0; self.comps.len()];
                let nx = (reach / cell[0]).ceil() as i64 + 1;
                let ny = (reach / cell[1]).ceil() as i64 + 1;
                let ix0 = (r_t[0] / cell[0]).floor() as i64;
                let iy0 = (r_t[1] / cell[1]).floor() as i64;
                for s in strings {
                    for ix in ix0 - nx..=ix0 + nx {
                        for iy in iy0 - ny..=iy0 + ny {
                            let site = [s[0] + ix as f64 * cell[0], s[1] + iy as f64 * cell[1]];
                            let d = [r_t[0] - site[0], r_t[1] - site[1]];
                            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                            if r > reach {
                                continue;
                            }
                            let mut sum = 0.0;
                            for (c, p) in probs.iter_mut().enumerate() {
                                *p = self.opts.rate_scale * self.component_density(c, r);
                                sum += *p;
                            }
                            if sum > 1.0 {
                                return Err(Error::domain(format!(
                                    "collision probability {sum} per site exceeds one; lower the rate scale"
                                )));
                            }
                            let u: f64 = rng.gen();
                            if u < sum {
                                let c = pick(&probs, u);
                                out.push(self.collide(c, d, rng)?);
                            }
                        }
                    }
                }
                clock.next_z += period;
            }
        }
        Ok(())
    }

    fn pick_plane<R: Rng + ?Sized>(&self, c: usize, x: f64, spacing: f64, lw: &RadialTable, rng: &mut R) -> f64 {
        let range = self.comps[c].range;
        let j0 = ((x - range) / spacing).floor() as i64;
        let j1 = ((x + range) / spacing).ceil() as i64;
        let cands: Vec<(f64, f64)> = (j0..=j1)
            .map(|j| {
                let dx = x - j as f64 * spacing;
                (dx, if dx.abs() <= range { lw.eval(dx.abs()).max(0.0) } else { 0.0 })
            })
            .collect();
        let total: f64 = cands.iter().map(|c| c.1).sum();
        let mut u = rng.gen::<f64>() * total;
        for &(dx, w) in &cands {
            if u < w {
                return dx;
            }
            u -= w;
        }
        cands
            .iter()
            .rev()
            .find(|c| c.1 > 0.0)
            .map_or(cands[0].0, |c| c.0)
    }

    fn pick_in_plane<R: Rng + ?Sized>(&self, c: usize, dx: f64, rng: &mut R) -> Result<f64> {
        let range = self.comps[c].range;
        let ym = (range * range - dx * dx).max(0.0).sqrt();
        let env = self.envelope(c, dx.abs());
        for _ in 0..10_000_000 {
            let y = (2.0 * rng.gen::<f64>() - 1.0) * ym;
            let d = (dx * dx + y * y).sqrt();
            if rng.gen::<f64>() * env < self.component_density(c, d) {
                return Ok(y);
            }
        }
        Err(Error::Statistics("in-plane position rejection did not terminate".into()))
    }

    /// Draw the kink of component `c` for mean-site offset `d`.
    fn collide<R: Rng + ?Sized>(&self, c: usize, d: [f64; 2], rng: &mut R) -> Result<Collision> {
        let comp = &self.comps[c];
        let abs_d = (d[0] * d[0] + d[1] * d[1]).sqrt();
        match comp.kind {
            CollisionKind::Vib => {
                let q = comp.tables.sample(abs_d, rng)?;
                Ok(Collision {
                    kind: CollisionKind::Vib,
                    shell: None,
                    q: rotate(q, d[1].atan2(d[0])),
                    offset: d,
                    site_offset: d,
                    strained: abs_d > 3.0 * self.u1,
                })
            }
            CollisionKind::Electron => {
                let k = comp.shell.expect("electron component has a shell");
                let b = self.electron_offset(k, c, d, rng)?;
                let abs_b = (b[0] * b[0] + b[1] * b[1]).sqrt();
                let q = comp.tables.sample(abs_b, rng)?;
                let u = [d[0] - b[0], d[1] - b[1]];
                Ok(Collision {
                    kind: CollisionKind::Electron,
                    shell: Some(k),
                    q: rotate(q, b[1].atan2(b[0])),
                    offset: b,
                    site_offset: d,
                    strained: (u[0] * u[0] + u[1] * u[1]).sqrt() > 3.0 * self.u1,
                })
            }
        }
    }

    /// Draw the particle offset from the nucleus, b = r_T - R_N,T, given a
    /// collision with shell k at mean-site offset d. The posterior density
    /// is G(d - b) sigma_k(|b|) lambda_k(|b|).
    fn electron_offset<R: Rng + ?Sized>(&self, k: usize, c: usize, d: [f64; 2], rng: &mut R) -> Result<[f64; 2]> {
        let sh = &self.ff.shells[k];
        let orb = sh.orbital;
        let u1 = self.u1;
        let abs_d = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let smax = self.sigma_e_max[k];
        let gmax = gauss2(0.0, u1);
        let target = self.component_density(c, abs_d) / sh.occupation;
        let acc_a = target / (gmax * smax);
        // the Gaussian proposal needs a decreasing projected density and a
        // nucleus that cannot reach the particle
        let trunc = 6.0 * u1;
        let bound_b = if orb.power <= 0.0 && abs_d > trunc {
            let lam = orb.line_density(abs_d - trunc)?;
            Some(smax * lam)
        } else {
            None
        };
        let use_b = matches!(bound_b, Some(m) if target / m > acc_a);
        for _ in 0..50_000_000u64 {
            if use_b {
                let m = bound_b.unwrap_or(f64::INFINITY);
                let u = [u1 * rng.sample::<f64, _>(StandardNormal), u1 * rng.sample::<f64, _>(StandardNormal)];
                if u[0] * u[0] + u[1] * u[1] > trunc * trunc {
                    continue;
                }
                let b = [d[0] - u[0], d[1] - u[1]];
                let r = (b[0] * b[0] + b[1] * b[1]).sqrt();
                let w = self.sigma_e[k].eval(r) * orb.line_density(r)?;
                if rng.gen::<f64>() * m < w {
                    return Ok(b);
                }
            } else {
                let v = orb.sample_offset(rng);
                let b = [v[0], v[1]];
                let r = (b[0] * b[0] + b[1] * b[1]).sqrt();
                let du = [d[0] - b[0], d[1] - b[1]];
                let w = gauss2(du[0] * du[0] + du[1] * du[1], u1) / gmax * self.sigma_e[k].eval(r) / smax;
                if rng.gen::<f64>() < w {
                    return Ok(b);
                }
            }
        }
        Err(Error::Statistics("electron offset rejection did not terminate".into()))
    }
}

fn pick(weights: &[f64], mut u: f64) -> usize {
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Integral over b of f(|b|) times the 2-D Gaussian of width u1 centred at
/// distance d, written with the angular integral done analytically.
fn convolve_gaussian<F>(f: &F, d: f64, u1: f64, beta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let s2 = u1 * u1;
    let err = std::cell::Cell::new(None);
    let g = |b: f64| {
        if b <= 0.0 {
            return 0.0;
        }
        let v = match f(b) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e.to_string()));
                return 0.0;
            }
        };
        let x = d - b;
        b * v / s2 * (-0.5 * x * x / s2).exp() * bessel_i0_scaled(d * b / s2)
    };
    let hi = d + 10.0 * u1;
    let lo = 1e-7 * u1.min(1.0 / beta);
    let mut pts = vec![0.0];
    pts.extend(log_breaks(lo, hi, 40));
    for i in -6..=6 {
        let p = d + i as f64 * u1;
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let est = Quadrature::new(1e-300, 1e-8).with_max_intervals(4000).integrate_breaks(g, &pts)?;
    if let Some(e) = err.take() {
        return Err(Error::domain(e));
    }
    Ok(est.value)
}
