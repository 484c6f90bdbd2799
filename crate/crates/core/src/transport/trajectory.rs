//! Single trajectories of the two scattering models.
//!
//! Both models share one fixed-depth leapfrog grid in the continuum
//! potential. Collisions (semi-classical kinks) and atom crossings (classical
//! impulses) happen inside drift phases, so a run with every collision
//! switched off is the bare continuum trajectory in either model.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::correlated::{DisplacementField, PhononCorrelationModel};
use super::integrate::{check_step, Phase};
use super::snapshot::{Constituents, ImpulseCounters, ImpulseKicker, Region, Snapshot, Snapshotter};
use crate::error::{Error, Result};
use crate::model::{BeamConfig, ChannelGeometry, CrystalModel, EntryDistribution, ParticleState};
use crate::potentials::{build_continuum_with, ContinuumOptions, ContinuumPotential};
use crate::sampler::{Collision, CollisionKernel, CollisionKind, KernelOptions};
use crate::units::EV_PER_MEV;
use crate::xsection::dech::electron_q_max;

/// One momentum kink of the semi-classical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KinkEvent {
    pub z_nm: f64,
    pub kind: CollisionKind,
    pub shell: Option<usize>,
    /// Transverse transfer, MeV.
    pub q: [f64; 2],
    pub eperp_before_ev: f64,
    pub eperp_after_ev: f64,
    /// Momentum before the kink, MeV.
    pub p_before: [f64; 2],
    pub strained: bool,
}

/// Kinks of one trajectory in depth order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KinkLog {
    pub events: Vec<KinkEvent>,
}

impl KinkLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// E_perp history and outcome of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub index: u64,
    /// Entry position in the channel frame, nm.
    pub entry: [f64; 2],
    /// Well depth used for the dechanneling test, eV.
    pub u0_ev: f64,
    /// (depth nm, E_perp eV) samples; the last one marks the end or the escape.
    pub samples: Vec<[f64; 2]>,
    pub dechanneled_at_nm: Option<f64>,
    pub end_nm: f64,
    pub kinks: u64,
    pub strained: u64,
    pub impulses: ImpulseCounters,
}

/// First depth at which E_perp exceeds U0, strictly.
pub fn detect_dechanneling(record: &TrajectoryRecord) -> Option<f64> {
    record
        .samples
        .iter()
        .find(|s| s[1] > record.u0_ev)
        .map(|s| s[0])
}

fn default_record_every() -> f64 {
    100.0
}

fn default_radius() -> f64 {
    1.0
}

fn default_reach() -> f64 {
    8.0
}

fn default_one() -> f64 {
    1.0
}

/// Options of the classical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmOptions {
    /// Snapshot radius in lattice constants.
    #[serde(default = "default_radius")]
    pub radius_lattice: f64,
    /// Electrons of shell k are placed within reach / beta_k of the path.
    #[serde(default = "default_reach")]
    pub electron_reach: f64,
    #[serde(default = "default_one")]
    pub thorn_charge: f64,
}

impl Default for CmOptions {
    fn default() -> Self {
        Self {
            radius_lattice: 1.0,
            electron_reach: 8.0,
            thorn_charge: 1.0,
        }
    }
}

/// Numerical settings shared by both models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportOptions {
    /// Continuum step; by default a hundredth of the shortest oscillation period.
    #[serde(default)]
    pub step_nm: Option<f64>,
    #[serde(default = "default_record_every")]
    pub record_every_nm: f64,
    #[serde(default)]
    pub kernel: KernelOptions,
    #[serde(default)]
    pub cm: CmOptions,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            step_nm: None,
            record_every_nm: default_record_every(),
            kernel: KernelOptions::default(),
            cm: CmOptions::default(),
        }
    }
}

/// Which models a context must support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cm,
    Scm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Cm => "cm",
            ModelKind::Scm => "scm",
        }
    }
}

#[derive(Debug, Clone)]
struct CmTools {
    snapshotter: Snapshotter,
    kicker: ImpulseKicker,
    radius: f64,
    slab: f64,
}

/// Read-only inputs shared by every trajectory of a run.
#[derive(Debug, Clone)]
pub struct TransportContext {
    pub crystal: CrystalModel,
    pub beam: BeamConfig,
    pub depth_nm: f64,
    pub step_nm: f64,
    pub record_every_nm: f64,
    pub u0_ev: f64,
    pub correlations: Option<PhononCorrelationModel>,
    v_lin: ContinuumPotential,
    kernel: Option<CollisionKernel>,
    cm: Option<CmTools>,
}

impl TransportContext {
    /// Builds the continuum table and the tables of the requested models.
    /// With correlations the continuum, the smeared atoms and the kernel use
    /// the short-wavelength width, and the channel follows the long field.
    pub fn build(
        crystal: &CrystalModel,
        beam: &BeamConfig,
        depth_nm: f64,
        lambda_c_nm: Option<f64>,
        models: &[ModelKind],
        opts: &TransportOptions,
    ) -> Result<Self> {
        crystal.validate()?;
        beam.validate()?;
        if !(depth_nm.is_finite() && depth_nm > 0.0) {
            return Err(Error::config("run.depth_um", "depth must be positive"));
        }
        if !(opts.record_every_nm > 0.0) {
            return Err(Error::config("transport.record_every_nm", "must be positive"));
        }
        let correlations = match lambda_c_nm {
            Some(l) => Some(PhononCorrelationModel::new(crystal, l)?),
            None => None,
        };
        let u_eff = correlations.map_or(crystal.u1_nm, |c| c.u_short_nm);
        let mut eff = crystal.clone();
        eff.u1_nm = u_eff;
        let constituents = Constituents::for_crystal(crystal).with_u1(u_eff);
        let v_lin = build_continuum_with(
            crystal,
            &constituents.screening,
            ContinuumOptions {
                u1_override: Some(u_eff),
                ..ContinuumOptions::default()
            },
        )?;
        let u0_ev = crystal.u0_ev.unwrap_or_else(|| v_lin.u0_ev());
        let energy = beam.energy_mev;
        let mut step = opts.step_nm.unwrap_or(v_lin.min_oscillation_period(energy) / 100.0);
        if let Some(c) = correlations {
            if c.u_long_nm > 0.0 {
                step = step.min(c.lambda_c_nm / 20.0);
            }
        }
        check_step(&v_lin, energy, step)?;
        if !(step > 0.0) {
            return Err(Error::config("transport.step_nm", "must be positive"));
        }
        let mass = beam.particle.mass_mev();
        let kernel = if models.contains(&ModelKind::Scm) {
            Some(CollisionKernel::build(&eff, &constituents.ff, energy, mass, opts.kernel)?)
        } else {
            None
        };
        let cm = if models.contains(&ModelKind::Cm) {
            let cmo = opts.cm;
            if !(cmo.radius_lattice > 0.0 && cmo.electron_reach >= 0.0 && cmo.thorn_charge.is_finite()) {
                return Err(Error::config("transport.cm", "radius and reach must be positive"));
            }
            let snapshotter = Snapshotter::new(crystal, constituents.clone())?.with_electron_reach(cmo.electron_reach);
            let kicker = ImpulseKicker::new(&constituents, electron_q_max(energy, mass)?)?.with_charge_scale(cmo.thorn_charge);
            let slab = match &crystal.geometry {
                ChannelGeometry::Planar { .. } => crystal.lattice_constant_nm,
                ChannelGeometry::Axial { period_nm, .. } => *period_nm,
            };
            Some(CmTools {
                snapshotter,
                kicker,
                radius: cmo.radius_lattice * crystal.lattice_constant_nm,
                slab,
            })
        } else {
            None
        };
        Ok(Self {
            crystal: crystal.clone(),
            beam: *beam,
            depth_nm,
            step_nm: step,
            record_every_nm: opts.record_every_nm,
            u0_ev,
            correlations,
            v_lin,
            kernel,
            cm,
        })
    }

    pub fn continuum(&self) -> &ContinuumPotential {
        &self.v_lin
    }

    pub fn kernel(&self) -> Option<&CollisionKernel> {
        self.kernel.as_ref()
    }

    /// Draws the entry state; the long-wavelength field, if any, is drawn next
    /// from the same stream so both models see the same crystal.
    fn entry<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<([f64; 2], [f64; 2], Option<DisplacementField>)> {
        let charge = self.beam.particle.charge_sign();
        let min = self.v_lin.minimum_position(charge);
        let x = match &self.crystal.geometry {
            ChannelGeometry::Planar { spacing_nm, .. } => match self.beam.entry {
                EntryDistribution::Delta => [min[0], 0.0],
                EntryDistribution::Uniform => [spacing_nm * rng.gen::<f64>(), 0.0],
                EntryDistribution::Gaussian { sigma_nm } => {
                    [min[0] + sigma_nm * rng.sample::<f64, _>(StandardNormal), 0.0]
                }
            },
            ChannelGeometry::Axial { cell_nm, .. } => match self.beam.entry {
                EntryDistribution::Delta => min,
                EntryDistribution::Uniform => [cell_nm[0] * rng.gen::<f64>(), cell_nm[1] * rng.gen::<f64>()],
                EntryDistribution::Gaussian { sigma_nm } => [
                    min[0] + sigma_nm * rng.sample::<f64, _>(StandardNormal),
                    min[1] + sigma_nm * rng.sample::<f64, _>(StandardNormal),
                ],
            },
        };
        let p = self.beam.energy_mev * (self.beam.entry_angle_mrad * 1e-3).sin();
        let field = match self.correlations {
            Some(m) if m.u_long_nm > 0.0 => Some(DisplacementField::draw(m, rng)),
            _ => None,
        };
        Ok((x, [p, 0.0], field))
    }

    fn track<'a>(&'a self, x_rel: [f64; 2], p_rel: [f64; 2], field: Option<&'a DisplacementField>) -> Track<'a> {
        let energy = self.beam.energy_mev;
        let (x, p) = match field {
            Some(f) => {
                let r = [x_rel[0], x_rel[1], 0.0];
                let c = f.long(r);
                let (d1, _) = f.long_z_derivatives(r);
                (
                    [x_rel[0] + c[0], x_rel[1] + c[1]],
                    [p_rel[0] + energy * d1[0], p_rel[1] + energy * d1[1]],
                )
            }
            None => (x_rel, p_rel),
        };
        Track::new(self, x, p, field)
    }

    fn new_record(&self, index: u64, entry: [f64; 2]) -> TrajectoryRecord {
        TrajectoryRecord {
            index,
            entry,
            u0_ev: self.u0_ev,
            samples: Vec::new(),
            dechanneled_at_nm: None,
            end_nm: 0.0,
            kinks: 0,
            strained: 0,
            impulses: ImpulseCounters::default(),
        }
    }
}

/// Leapfrog on the fixed grid z_n = n dz; between grid points the particle
/// is in a drift phase carrying the half-kicked momentum.
struct Track<'a> {
    ctx: &'a TransportContext,
    field: Option<&'a DisplacementField>,
    charge: i8,
    energy: f64,
    inv_e: f64,
    planar: bool,
    ph: Phase,
    z: f64,
    n: u64,
    step_start: f64,
    step_end: f64,
    in_drift: bool,
}

impl<'a> Track<'a> {
    fn new(ctx: &'a TransportContext, x: [f64; 2], p: [f64; 2], field: Option<&'a DisplacementField>) -> Self {
        let charge = ctx.beam.particle.charge_sign();
        let energy = ctx.beam.energy_mev;
        let mut t = Track {
            ctx,
            field,
            charge,
            energy,
            inv_e: 1.0 / energy,
            planar: ctx.v_lin.is_planar(),
            ph: Phase::new(x, p, &ctx.v_lin, charge),
            z: 0.0,
            n: 0,
            step_start: 0.0,
            step_end: ctx.step_nm.min(ctx.depth_nm),
            in_drift: false,
        };
        t.refresh();
        t
    }

    fn shift(&self) -> ([f64; 2], [f64; 2]) {
        match self.field {
            Some(f) => {
                let r = [self.ph.x[0], self.ph.x[1], self.z];
                let c = f.long(r);
                let (d1, _) = f.long_z_derivatives(r);
                ([c[0], c[1]], [d1[0], d1[1]])
            }
            None => ([0.0; 2], [0.0; 2]),
        }
    }

    fn refresh(&mut self) {
        if self.field.is_none() {
            self.ph.refresh(&self.ctx.v_lin, self.charge);
            return;
        }
        let (c, _) = self.shift();
        let x = self.ph.x;
        self.ph.x = [x[0] - c[0], x[1] - c[1]];
        self.ph.refresh(&self.ctx.v_lin, self.charge);
        self.ph.x = x;
    }

    /// Position relative to the (possibly bent) channel.
    fn relative_position(&self) -> [f64; 2] {
        let (c, _) = self.shift();
        [self.ph.x[0] - c[0], self.ph.x[1] - c[1]]
    }

    /// Momentum synchronised with the position. Inside a drift the stored
    /// momentum is the half-step value, corrected here with the force of the
    /// last grid point to second order.
    fn momentum(&self) -> [f64; 2] {
        if !self.in_drift {
            return self.ph.p;
        }
        let t = self.z - 0.5 * (self.step_start + self.step_end);
        [self.ph.p[0] + self.ph.force[0] * t, self.ph.p[1] + self.ph.force[1] * t]
    }

    /// Transverse energy relative to the channel, eV.
    fn eperp(&self) -> f64 {
        let (c, d1) = self.shift();
        let x = [self.ph.x[0] - c[0], self.ph.x[1] - c[1]];
        let pm = self.momentum();
        let p = [pm[0] - self.energy * d1[0], pm[1] - self.energy * d1[1]];
        let p2 = if self.planar { p[0] * p[0] } else { p[0] * p[0] + p[1] * p[1] };
        p2 * self.inv_e * 0.5 * EV_PER_MEV + self.ctx.v_lin.potential_energy_ev(x, self.charge)
    }

    fn start(&mut self) {
        self.ph.half_kick(self.step_end - self.step_start);
        self.in_drift = true;
    }

    /// Advance to `target` (clamped to the depth). `on_grid(z, E_perp)` is
    /// called at each grid point passed; returning true stops the track there.
    fn advance_to<F: FnMut(f64, f64) -> bool>(&mut self, target: f64, mut on_grid: F) -> bool {
        let depth = self.ctx.depth_nm;
        let target = target.min(depth);
        loop {
            if self.step_end <= target {
                self.ph.drift(self.step_end - self.z, self.inv_e);
                self.z = self.step_end;
                self.refresh();
                let h = self.step_end - self.step_start;
                self.ph.half_kick(h);
                self.in_drift = false;
                if on_grid(self.z, self.eperp()) {
                    return true;
                }
                if self.z >= depth {
                    return false;
                }
                self.n += 1;
                self.step_start = self.z;
                self.step_end = ((self.n + 1) as f64 * self.ctx.step_nm).min(depth);
                self.ph.half_kick(self.step_end - self.step_start);
                self.in_drift = true;
            } else {
                if target > self.z {
                    self.ph.drift(target - self.z, self.inv_e);
                    self.z = target;
                }
                return false;
            }
        }
    }

    fn kick(&mut self, q: [f64; 2]) {
        self.ph.p[0] += q[0];
        self.ph.p[1] += q[1];
    }

    fn state(&self) -> Result<ParticleState> {
        ParticleState::new(
            self.energy,
            self.ctx.beam.particle.mass_mev(),
            self.charge,
            [self.ph.x[0], self.ph.x[1], self.z],
            self.momentum(),
        )
    }
}

/// Sampling of E_perp on the record grid and the escape test.
struct Recorder<'r> {
    rec: &'r mut TrajectoryRecord,
    every: f64,
    next: f64,
}

impl<'r> Recorder<'r> {
    fn on_grid(&mut self, z: f64, e: f64, depth: f64) -> bool {
        if e > self.rec.u0_ev {
            self.rec.samples.push([z, e]);
            self.rec.dechanneled_at_nm = Some(z);
            self.rec.end_nm = z;
            return true;
        }
        if z >= self.next || z >= depth {
            self.rec.samples.push([z, e]);
            while self.next <= z {
                self.next += self.every;
            }
        }
        if z >= depth {
            self.rec.end_nm = z;
        }
        false
    }

    fn escape(&mut self, z: f64, e: f64) -> bool {
        if e > self.rec.u0_ev {
            self.rec.samples.push([z, e]);
            self.rec.dechanneled_at_nm = Some(z);
            self.rec.end_nm = z;
            return true;
        }
        false
    }
}

/// Semi-classical trajectory: continuum motion interrupted by kinks drawn
/// from the collision kernel at every scheduled site encounter.
pub fn run_scm_trajectory<R: Rng + ?Sized>(
    ctx: &TransportContext,
    index: u64,
    rng: &mut R,
) -> Result<(TrajectoryRecord, KinkLog)> {
    let kernel = ctx
        .kernel
        .as_ref()
        .ok_or_else(|| Error::config("run.model", "context was built without the semi-classical kernel"))?;
    let (x0, p0, field) = ctx.entry(rng)?;
    let mut rec = ctx.new_record(index, x0);
    let mut log = KinkLog::default();
    let mut track = ctx.track(x0, p0, field.as_ref());
    let depth = ctx.depth_nm;
    let mut recorder = Recorder {
        rec: &mut rec,
        every: ctx.record_every_nm,
        next: ctx.record_every_nm,
    };
    let e0 = track.eperp();
    recorder.rec.samples.push([0.0, e0]);
    if recorder.escape(0.0, e0) {
        return Ok((rec, log));
    }
    track.start();
    let mut clock = kernel.start_clock(0.0, rng);
    let mut hits: Vec<Collision> = Vec::new();
    loop {
        let event = clock.next_z;
        if track.advance_to(event, |z, e| recorder.on_grid(z, e, depth)) {
            break;
        }
        if event > depth {
            break;
        }
        hits.clear();
        kernel.resolve(&mut clock, track.relative_position(), rng, &mut hits)?;
        let mut escaped = false;
        for c in &hits {
            let before = track.eperp();
            let p_before = track.momentum();
            track.kick(c.q);
            let after = track.eperp();
            log.events.push(KinkEvent {
                z_nm: event,
                kind: c.kind,
                shell: c.shell,
                q: c.q,
                eperp_before_ev: before,
                eperp_after_ev: after,
                p_before,
                strained: c.strained,
            });
            recorder.rec.kinks += 1;
            recorder.rec.strained += c.strained as u64;
            if recorder.escape(event, after) {
                escaped = true;
                break;
            }
        }
        if escaped {
            break;
        }
    }
    debug_assert!(track.state().map(|s| s.mass_shell_residual() < 1e-9).unwrap_or(true));
    Ok((rec, log))
}

/// Classical trajectory: the same continuum motion, with the straight-path
/// impulse of every atom and electron of fresh snapshots, regenerated each
/// lattice period around the particle.
pub fn run_cm_trajectory<R: RngCore + ?Sized>(ctx: &TransportContext, index: u64, rng: &mut R) -> Result<TrajectoryRecord> {
    let tools = ctx
        .cm
        .as_ref()
        .ok_or_else(|| Error::config("run.model", "context was built without the classical model"))?;
    let (x0, p0, field) = ctx.entry(rng)?;
    let mut rec = ctx.new_record(index, x0);
    let mut track = ctx.track(x0, p0, field.as_ref());
    let depth = ctx.depth_nm;
    let charge = track.charge;
    let mut counters = ImpulseCounters::default();
    let mut recorder = Recorder {
        rec: &mut rec,
        every: ctx.record_every_nm,
        next: ctx.record_every_nm,
    };
    let e0 = track.eperp();
    recorder.rec.samples.push([0.0, e0]);
    if recorder.escape(0.0, e0) {
        return Ok(rec);
    }
    track.start();
    let mut snap = Snapshot::default();
    let mut z_s = 0.0;
    'slabs: while z_s < depth {
        let z_e = (z_s + tools.slab).min(depth);
        let region = Region {
            center: track.ph.x,
            radius: tools.radius,
            z_range: [z_s, z_e],
        };
        tools.snapshotter.fill(&mut snap, &region, rng.next_u64(), field.as_ref())?;
        for atom in &snap.atoms {
            let z = atom.site[2];
            if track.advance_to(z, |zz, e| recorder.on_grid(zz, e, depth)) {
                break 'slabs;
            }
            let q = tools.kicker.kick(&snap, atom, track.ph.x, charge, &mut counters);
            track.kick(q);
            if recorder.escape(z, track.eperp()) {
                break 'slabs;
            }
        }
        if track.advance_to(z_e, |zz, e| recorder.on_grid(zz, e, depth)) {
            break;
        }
        z_s = z_e;
    }
    rec.impulses = counters;
    Ok(rec)
}

/// Bare continuum trajectory on the same grid, for comparisons.
pub fn run_continuum_trajectory<R: Rng + ?Sized>(ctx: &TransportContext, index: u64, rng: &mut R) -> Result<(TrajectoryRecord, ParticleState)> {
    let (x0, p0, field) = ctx.entry(rng)?;
    let mut rec = ctx.new_record(index, x0);
    let mut track = ctx.track(x0, p0, field.as_ref());
    let depth = ctx.depth_nm;
    let mut recorder = Recorder {
        rec: &mut rec,
        every: ctx.record_every_nm,
        next: ctx.record_every_nm,
    };
    let e0 = track.eperp();
    recorder.rec.samples.push([0.0, e0]);
    if !recorder.escape(0.0, e0) {
        track.start();
        track.advance_to(depth, |z, e| recorder.on_grid(z, e, depth));
    }
    let state = track.state()?;
    Ok((rec, state))
}
