//! Depth-stepping integrators for the transverse motion. Depth z is the
//! independent variable and the motion is reduced to H = p^2 / 2E + U(x).

use crate::error::{Error, Result};
use crate::model::ParticleState;
use crate::potentials::{ContinuumPotential, Thorn};
use crate::units::EV_PER_MEV;

/// Largest continuum step accepted for energy `energy`, nm.
pub fn stability_bound(v_lin: &ContinuumPotential, energy: f64) -> f64 {
    v_lin.min_oscillation_period(energy) / 50.0
}

pub(crate) fn check_step(v_lin: &ContinuumPotential, energy: f64, dz: f64) -> Result<()> {
    let bound = stability_bound(v_lin, energy);
    if !dz.is_finite() || dz.abs() > bound {
        return Err(Error::Stability { dz_nm: dz, bound_nm: bound });
    }
    Ok(())
}

/// Transverse phase-space point with the continuum force (MeV/nm) cached at x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Phase {
    pub x: [f64; 2],
    pub p: [f64; 2],
    pub force: [f64; 2],
}

impl Phase {
    pub fn new(x: [f64; 2], p: [f64; 2], v_lin: &ContinuumPotential, charge: i8) -> Self {
        let mut ph = Phase { x, p, force: [0.0; 2] };
        ph.refresh(v_lin, charge);
        ph
    }

    #[inline]
    pub fn refresh(&mut self, v_lin: &ContinuumPotential, charge: i8) {
        let f = v_lin.force_ev_per_nm(self.x, charge);
        self.force = [f[0] / EV_PER_MEV, f[1] / EV_PER_MEV];
    }

    #[inline]
    pub fn half_kick(&mut self, dz: f64) {
        self.p[0] += 0.5 * dz * self.force[0];
        self.p[1] += 0.5 * dz * self.force[1];
    }

    #[inline]
    pub fn drift(&mut self, dz: f64, inv_e: f64) {
        self.x[0] += self.p[0] * inv_e * dz;
        self.x[1] += self.p[1] * inv_e * dz;
    }

    /// One kick-drift-kick update.
    #[inline]
    pub fn leapfrog(&mut self, v_lin: &ContinuumPotential, charge: i8, inv_e: f64, dz: f64) {
        self.half_kick(dz);
        self.drift(dz, inv_e);
        self.refresh(v_lin, charge);
        self.half_kick(dz);
    }

    pub fn into_state(self, template: &ParticleState, z: f64) -> Result<ParticleState> {
        let mut s = *template;
        s.position = [self.x[0], self.x[1], z];
        s.set_transverse_momentum(self.p)?;
        Ok(s)
    }
}

/// One symplectic leapfrog step of length `dz` in the continuum potential.
pub fn step_continuum(state: &ParticleState, v_lin: &ContinuumPotential, dz: f64) -> Result<ParticleState> {
    check_step(v_lin, state.energy, dz)?;
    let mut ph = Phase::new(state.transverse_position(), state.transverse_momentum(), v_lin, state.charge_sign);
    ph.leapfrog(v_lin, state.charge_sign, 1.0 / state.energy, dz);
    ph.into_state(state, state.depth() + dz)
}

/// Thorn potentials acting on the particle in addition to the continuum.
#[derive(Debug, Clone, Default)]
pub struct ThornField {
    thorns: Vec<Thorn>,
    scale: f64,
}

impl ThornField {
    pub fn new(thorns: Vec<Thorn>) -> Self {
        Self { thorns, scale: 1.0 }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    /// Multiply every thorn charge by `scale`; zero switches the thorns off.
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn len(&self) -> usize {
        self.thorns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thorns.is_empty()
    }

    pub fn thorns(&self) -> &[Thorn] {
        &self.thorns
    }

    fn active(&self) -> bool {
        self.scale != 0.0 && !self.thorns.is_empty()
    }

    /// Force on a particle of charge sign `charge`, MeV/nm.
    fn force(&self, r: [f64; 3], charge: i8) -> [f64; 2] {
        let mut g = [0.0; 2];
        for t in &self.thorns {
            let d = t.gradient(r);
            g[0] += d[0];
            g[1] += d[1];
        }
        let s = -(charge as f64) * self.scale / EV_PER_MEV;
        [s * g[0], s * g[1]]
    }

    /// Distance from r to the nearest thorn centre.
    fn nearest(&self, r: [f64; 3]) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.thorns {
            for p in &t.parts {
                let d = [r[0] - p.center[0], r[1] - p.center[1], r[2] - p.center[2]];
                best = best.min(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            }
        }
        best.sqrt()
    }
}

/// Step counters of the adaptive integrator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdaptiveStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Steps accepted at the minimum size despite the error estimate.
    pub floored: usize,
}

impl AdaptiveStats {
    fn add(&mut self, o: AdaptiveStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.floored += o.floored;
    }
}

/// Tolerances of the adaptive thorn integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol_nm: f64,
    pub abs_tol_mev: f64,
    /// Smallest substep, nm. Steps at this size are accepted regardless.
    pub min_step_nm: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol_nm: 1e-12,
            abs_tol_mev: 1e-12,
            min_step_nm: 1e-8,
            max_steps: 2_000_000,
        }
    }
}

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand–Prince 5(4) integration of drift plus thorn forces from z0 over dz.
fn drift_through_thorns(
    y0: [f64; 4],
    z0: f64,
    dz: f64,
    inv_e: f64,
    charge: i8,
    field: &ThornField,
    opts: &AdaptiveOptions,
) -> Result<([f64; 4], AdaptiveStats)> {
    let mut stats = AdaptiveStats::default();
    if dz == 0.0 {
        return Ok((y0, stats));
    }
    if !field.active() {
        // the force-free flow is exact in one step
        let y = [y0[0] + y0[2] * inv_e * dz, y0[1] + y0[3] * inv_e * dz, y0[2], y0[3]];
        stats.accepted = 1;
        return Ok((y, stats));
    }
    let dir = dz.signum();
    let z_end = z0 + dz;
    let rhs = |z: f64, y: &[f64; 4]| -> [f64; 4] {
        let f = field.force([y[0], y[1], z], charge);
        [y[2] * inv_e, y[3] * inv_e, f[0], f[1]]
    };
    let mut z = z0;
    let mut y = y0;
    let mut h = dz.abs();
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs(z, &y);
    while dir * (z_end - z) > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::domain(format!(
                "adaptive thorn integration exceeded {} steps near z = {z} nm",
                opts.max_steps
            )));
        }
        // never step over a Coulomb peak unseen
        let near = field.nearest([y[0], y[1], z]);
        let h_geo = (0.25 * near).max(opts.min_step_nm);
        h = h.min(h_geo).min(dir * (z_end - z)).max(opts.min_step_nm.min(dir * (z_end - z)));
        let hs = dir * h;
        for s in 1..7 {
            let mut yt = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s][j];
                if a != 0.0 {
                    for i in 0..4 {
                        yt[i] += hs * a * kj[i];
                    }
                }
            }
            k[s] = rhs(z + DP_C[s] * hs, &yt);
            if s == 6 {
                // FSAL: stage 7 is evaluated at the 5th-order solution
                let mut err = 0.0f64;
                for i in 0..4 {
                    let e: f64 = (0..7).map(|j| DP_E[j] * k[j][i]).sum::<f64>() * hs;
                    let tol = if i < 2 { opts.abs_tol_nm } else { opts.abs_tol_mev };
                    let sc = tol + opts.rel_tol * y[i].abs().max(yt[i].abs());
                    err = err.max(e.abs() / sc);
                }
                let floor = h <= opts.min_step_nm;
                if err <= 1.0 || floor {
                    if err > 1.0 {
                        stats.floored += 1;
                    }
                    stats.accepted += 1;
                    z += hs;
                    y = yt;
                    k[0] = k[6];
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= grow;
                } else {
                    stats.rejected += 1;
                    h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
            }
        }
    }
    Ok((y, stats))
}

/// One step of length `dz` in the full instantaneous potential: half
/// continuum kicks around an adaptive integration of drift plus thorn forces.
/// Without thorns this is exactly [`step_continuum`].
pub fn step_cm(state: &ParticleState, field: &ThornField, v_lin: &ContinuumPotential, dz: f64) -> Result<ParticleState> {
    step_cm_with(state, field, v_lin, dz, &AdaptiveOptions::default()).map(|(s, _)| s)
}

pub fn step_cm_with(
    state: &ParticleState,
    field: &ThornField,
    v_lin: &ContinuumPotential,
    dz: f64,
    opts: &AdaptiveOptions,
) -> Result<(ParticleState, AdaptiveStats)> {
    check_step(v_lin, state.energy, dz)?;
    let charge = state.charge_sign;
    let inv_e = 1.0 / state.energy;
    let mut ph = Phase::new(state.transverse_position(), state.transverse_momentum(), v_lin, charge);
    ph.half_kick(dz);
    let y0 = [ph.x[0], ph.x[1], ph.p[0], ph.p[1]];
    let (y, stats) = drift_through_thorns(y0, state.depth(), dz, inv_e, charge, field, opts)?;
    ph.x = [y[0], y[1]];
    ph.p = [y[2], y[3]];
    ph.refresh(v_lin, charge);
    ph.half_kick(dz);
    Ok((ph.into_state(state, state.depth() + dz)?, stats))
}

/// Integrate `n` steps of [`step_cm`], accumulating the step counters.
pub fn integrate_cm(
    state: &ParticleState,
    field: &ThornField,
    v_lin: &ContinuumPotential,
    dz: f64,
    n: usize,
    opts: &AdaptiveOptions,
) -> Result<(ParticleState, AdaptiveStats)> {
    let mut s = *state;
    let mut total = AdaptiveStats::default();
    for _ in 0..n {
        let (next, st) = step_cm_with(&s, field, v_lin, dz, opts)?;
        total.add(st);
        s = next;
    }
    Ok((s, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::transverse_energy;
    use crate::potentials::PhenomenologicalThorn;

    const E: f64 = 1000.0;

    fn harmonic(k_ev_nm2: f64, d: f64) -> ContinuumPotential {
        // periodic parabola wells; the cusp at the boundary is never reached
        ContinuumPotential::planar_from_fn(d, 2000, |x| {
            let t = x - 0.5 * d;
            0.5 * k_ev_nm2 * t * t
        })
        .unwrap()
    }

    fn state(x: f64, px: f64) -> ParticleState {
        ParticleState::new(E, 0.511, 1, [x, 0.0, 0.0], [px, 0.0]).unwrap()
    }

    #[test]
    fn harmonic_period_matches_oracle() {
        let k = 2.0e4;
        let d = 1.0;
        let v = harmonic(k, d);
        // 2 pi sqrt(E / V'') with E in eV
        let period = 2.0 * std::f64::consts::PI * (E * 1e6 / k).sqrt();
        let dz = period / 4000.0;
        let mut s = state(0.5 * d + 0.05, 0.0);
        let mut crossings = Vec::new();
        let mut prev = s.position[0] - 0.5 * d;
        for i in 0..(3.5 * 4000.0) as usize {
            s = step_continuum(&s, &v, dz).unwrap();
            let now = s.position[0] - 0.5 * d;
            if prev > 0.0 && now <= 0.0 {
                let frac = prev / (prev - now);
                crossings.push((i as f64 + frac) * dz);
            }
            prev = now;
        }
        assert!(crossings.len() >= 3);
        let measured = crossings[2] - crossings[1];
        assert!((measured / period - 1.0).abs() < 1e-3, "{measured} vs {period}");
    }

    #[test]
    fn transverse_energy_is_conserved() {
        let d = 0.192;
        let v = ContinuumPotential::planar_from_fn(d, 400, |x| 20.0 * (2.0 * std::f64::consts::PI * x / d).cos()).unwrap();
        let dz = v.min_oscillation_period(E) / 400.0;
        let mut s = state(0.3 * d, 0.0);
        let e0 = transverse_energy(&s, &v).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..40_000 {
            s = step_continuum(&s, &v, dz).unwrap();
            worst = worst.max((transverse_energy(&s, &v).unwrap() / e0 - 1.0).abs());
            assert!(s.mass_shell_residual() < 1e-9);
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn mirror_symmetry() {
        let d = 0.192;
        let v = ContinuumPotential::planar_from_fn(d, 400, |x| 20.0 * (2.0 * std::f64::consts::PI * x / d).cos()).unwrap();
        let dz = stability_bound(&v, E) / 2.0;
        // the potential is even about x = d / 2
        let mut a = state(0.5 * d + 0.031, 0.05);
        let mut b = state(0.5 * d - 0.031, -0.05);
        for _ in 0..500 {
            a = step_continuum(&a, &v, dz).unwrap();
            b = step_continuum(&b, &v, dz).unwrap();
            assert!((a.position[0] - 0.5 * d + b.position[0] - 0.5 * d).abs() < 1e-10);
            assert!((a.momentum[0] + b.momentum[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let v = harmonic(2.0e4, 1.0);
        let bound = stability_bound(&v, E);
        let s = state(0.5, 0.0);
        assert!(matches!(step_continuum(&s, &v, 1.5 * bound), Err(Error::Stability { .. })));
        assert!(step_continuum(&s, &v, 0.9 * bound).is_ok());
    }

    #[test]
    fn empty_field_reproduces_continuum_step() {
        let d = 0.192;
        let v = ContinuumPotential::planar_from_fn(d, 400, |x| 20.0 * (2.0 * std::f64::consts::PI * x / d).cos()).unwrap();
        let dz = stability_bound(&v, E) / 3.0;
        let mut a = state(0.07, 0.03);
        let mut b = a;
        let field = ThornField::empty();
        for _ in 0..1000 {
            a = step_continuum(&a, &v, dz).unwrap();
            b = step_cm(&b, &field, &v, dz).unwrap();
        }
        assert!((a.position[0] - b.position[0]).abs() < 1e-10);
        assert!((a.momentum[0] - b.momentum[0]).abs() < 1e-10);
    }

    #[test]
    fn isolated_thorn_gives_eikonal_kick() {
        let thorn = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6).unwrap().thorn().unwrap();
        let flat = ContinuumPotential::planar_from_fn(1.0, 16, |_| 0.0).unwrap();
        let field = ThornField::new(vec![thorn.clone()]);
        for &b in &[3e-5, 1e-3, 0.02] {
            let s = ParticleState::new(E, 0.511, 1, [b, 0.0, -0.3], [0.0, 0.0]).unwrap();
            let (out, _) = integrate_cm(&s, &field, &flat, 0.05, 12, &AdaptiveOptions::default()).unwrap();
            let want = thorn.kick([b, 0.0]).unwrap()[0];
            assert!((out.momentum[0] / want - 1.0).abs() < 0.01, "b={b}: {} vs {want}", out.momentum[0]);
        }
    }

    #[test]
    fn reversal_recovers_the_start() {
        let thorn = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6).unwrap().thorn().unwrap();
        let d = 0.192;
        let v = ContinuumPotential::planar_from_fn(d, 400, |x| 20.0 * (2.0 * std::f64::consts::PI * x / d).cos()).unwrap();
        let field = ThornField::new(vec![thorn]);
        let s0 = ParticleState::new(E, 0.511, 1, [0.002, 0.001, -0.1], [0.01, -0.02]).unwrap();
        let opts = AdaptiveOptions::default();
        let (fwd, _) = integrate_cm(&s0, &field, &v, 0.02, 10, &opts).unwrap();
        let (back, _) = integrate_cm(&fwd, &field, &v, -0.02, 10, &opts).unwrap();
        for i in 0..2 {
            assert!((back.position[i] - s0.position[i]).abs() < 1e-6 * (1.0 + s0.position[i].abs()));
            assert!((back.momentum[i] - s0.momentum[i]).abs() < 1e-6 * 0.02);
        }
    }
}
