//! Ensembles of independent trajectories and their summaries.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::survival::{estimate_dechanneling_length, survival_curve, LdFit, SurvivalCurve};
use super::trajectory::{run_cm_trajectory, run_scm_trajectory, KinkLog, ModelKind, TrajectoryRecord, TransportContext};
use crate::error::{Error, Result};
use crate::sampler::{CollisionKind, RandomStream};

/// Raw per-trajectory output in trajectory order.
#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub model: ModelKind,
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
    /// Kinks per trajectory; empty logs for the classical model.
    pub kinks: Vec<KinkLog>,
    pub wall_time_s: f64,
}

impl EnsembleOutput {
    pub fn escapes(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.dechanneled_at_nm).collect()
    }
}

/// Worker count: explicit value, else `THORNSIM_THREADS`, else all cores.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("THORNSIM_THREADS").ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `n` trajectories; trajectory i draws from stream (seed, i), so the
/// result does not depend on the number of threads.
pub fn run_ensemble(ctx: &TransportContext, model: ModelKind, n: usize, seed: u64, threads: usize) -> Result<EnsembleOutput> {
    if n == 0 {
        return Err(Error::config("run.n_trajectories", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::config("run.threads", e.to_string()))?;
    let start = Instant::now();
    let results: Vec<Result<(TrajectoryRecord, KinkLog)>> = pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::new(seed, i);
                match model {
                    ModelKind::Scm => run_scm_trajectory(ctx, i, &mut rng),
                    ModelKind::Cm => run_cm_trajectory(ctx, i, &mut rng).map(|r| (r, KinkLog::default())),
                }
            })
            .collect()
    });
    let mut records = Vec::with_capacity(n);
    let mut kinks = Vec::with_capacity(n);
    for r in results {
        let (rec, log) = r?;
        records.push(rec);
        kinks.push(log);
    }
    Ok(EnsembleOutput {
        model,
        seed,
        records,
        kinks,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EventStats {
    pub trajectories: usize,
    pub dechanneled: usize,
    pub kinks: u64,
    pub vib_kinks: u64,
    pub electron_kinks: u64,
    /// Kinks whose site weight was evaluated far out in the thermal tail.
    pub strained: u64,
    pub atom_impulses: u64,
    pub electron_impulses: u64,
    pub truncated_impulses: u64,
    /// Mean squared transverse transfer per unit depth of the kinks, MeV^2/nm.
    pub kink_q2_per_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub model: ModelKind,
    pub survival: SurvivalCurve,
    pub dechanneling_length: LdFit,
    pub stats: EventStats,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Survival curve over `bins` depth bins and the L_d fit over the window
/// given as fractions of the depth.
pub fn summarize(out: &EnsembleOutput, depth_nm: f64, bins: usize, window: [f64; 2]) -> Result<SimulationResult> {
    if !(0.0..1.0).contains(&window[0]) || !(window[1] > window[0] && window[1] <= 1.0) {
        return Err(Error::config("output.fit_window", "fractions must satisfy 0 <= start < end <= 1"));
    }
    let escapes = out.escapes();
    let survival = survival_curve(&escapes, depth_nm, bins)?;
    let fit = estimate_dechanneling_length(&escapes, [window[0] * depth_nm, window[1] * depth_nm])?;
    let mut s = EventStats {
        trajectories: out.records.len(),
        ..EventStats::default()
    };
    let mut q2 = 0.0;
    let mut path = 0.0;
    for (rec, log) in out.records.iter().zip(&out.kinks) {
        s.dechanneled += rec.dechanneled_at_nm.is_some() as usize;
        s.kinks += rec.kinks;
        s.strained += rec.strained;
        s.atom_impulses += rec.impulses.atoms;
        s.electron_impulses += rec.impulses.electrons;
        s.truncated_impulses += rec.impulses.truncated;
        path += rec.end_nm;
        for e in &log.events {
            match e.kind {
                CollisionKind::Vib => s.vib_kinks += 1,
                CollisionKind::Electron => s.electron_kinks += 1,
            }
            q2 += e.q[0] * e.q[0] + e.q[1] * e.q[1];
        }
    }
    s.kink_q2_per_nm = if path > 0.0 { q2 / path } else { 0.0 };
    Ok(SimulationResult {
        model: out.model,
        survival,
        dechanneling_length: fit,
        stats: s,
        wall_time_s: out.wall_time_s,
    })
}

/// Paired comparison of the two models on shared seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub n: usize,
    pub final_depth_um: f64,
    pub cm_dechanneled: f64,
    pub scm_dechanneled: f64,
    /// CM minus SCM dechanneled fraction at the final depth.
    pub difference: f64,
    /// Paired standard error of the difference.
    pub stderr: f64,
    /// Lower end of the one-sided 95 % interval of the difference.
    pub lower_95: f64,
    /// True when CM dechannels at least as much as SCM at 95 % confidence.
    pub cm_ge_scm: bool,
    /// L_d(CM) / L_d(SCM).
    pub ld_ratio: f64,
    pub cm_ld_shorter: bool,
}

const Z_95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

pub fn compare_outputs(cm: &EnsembleOutput, scm: &EnsembleOutput, depth_nm: f64, cm_fit: &LdFit, scm_fit: &LdFit) -> Result<Comparison> {
    let n = cm.records.len();
    if n == 0 || n != scm.records.len() || cm.seed != scm.seed {
        return Err(Error::Statistics("paired comparison needs equal ensembles on shared seeds".into()));
    }
    let (mut only_cm, mut only_scm, mut d_cm, mut d_scm) = (0usize, 0usize, 0usize, 0usize);
    for (a, b) in cm.records.iter().zip(&scm.records) {
        let x = a.dechanneled_at_nm.is_some();
        let y = b.dechanneled_at_nm.is_some();
        d_cm += x as usize;
        d_scm += y as usize;
        only_cm += (x && !y) as usize;
        only_scm += (!x && y) as usize;
    }
    let nf = n as f64;
    let diff = (d_cm as f64 - d_scm as f64) / nf;
    // variance of the mean of the paired differences in {-1, 0, 1}
    let m2 = (only_cm + only_scm) as f64 / nf;
    let var = ((m2 - diff * diff) / nf).max(0.0);
    let se = var.sqrt();
    let lower = diff - Z_95_ONE_SIDED * se;
    let ld_ratio = cm_fit.l_um / scm_fit.l_um;
    Ok(Comparison {
        n,
        final_depth_um: depth_nm / 1e3,
        cm_dechanneled: d_cm as f64 / nf,
        scm_dechanneled: d_scm as f64 / nf,
        difference: diff,
        stderr: se,
        lower_95: lower,
        cm_ge_scm: lower >= 0.0,
        ld_ratio,
        cm_ld_shorter: cm_fit.l_um < scm_fit.l_um,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BeamConfig, CrystalModel, EntryDistribution, Particle};
    use crate::sampler::KernelOptions;
    use crate::transport::trajectory::TransportOptions;

    #[test]
    fn ensemble_is_independent_of_thread_count() {
        let beam = BeamConfig {
            particle: Particle::Positron,
            energy_mev: 1000.0,
            entry_angle_mrad: 0.0,
            entry: EntryDistribution::Uniform,
        };
        let opts = TransportOptions {
            kernel: KernelOptions::coarse(),
            ..TransportOptions::default()
        };
        let ctx = TransportContext::build(&CrystalModel::si_110(), &beam, 1000.0, None, &[ModelKind::Scm, ModelKind::Cm], &opts).unwrap();
        for model in [ModelKind::Scm, ModelKind::Cm] {
            let a = run_ensemble(&ctx, model, 6, 42, 1).unwrap();
            let b = run_ensemble(&ctx, model, 6, 42, 3).unwrap();
            assert_eq!(a.records, b.records);
            assert_eq!(a.kinks, b.kinks);
        }
        assert!(run_ensemble(&ctx, ModelKind::Scm, 0, 1, 1).is_err());
    }

    #[test]
    fn env_var_is_the_thread_fallback() {
        assert_eq!(resolve_threads(Some(3)), 3);
        assert!(resolve_threads(None) >= 1);
    }
}
