//! Command-line front end: argument parsing and dispatch of the seven
//! subcommands. Flags override the config file, which overrides defaults.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use super::config::{parse_config, Format, ModelChoice, RunConfig, ThornChoice};
use super::output::{
    csv_text, events_jsonl, format_table, json_text, paired_survival_csv, survival_csv, write_file, Provenance,
};
use crate::error::{Error, Result};
use crate::potentials::{PhenomenologicalThorn, RadialShape, ScreeningModel, Thorn, ThornElectron, ThornPart, ThornVib};
use crate::transport::{
    compare_outputs, resolve_threads, run_ensemble, summarize, Comparison, EnsembleOutput, ModelKind, SimulationResult,
    TransportContext,
};
use crate::xsection::classical::{classical_dsigma, ImpactGrid, ThornKicker};
use crate::xsection::dech::{dech_ratio, ratio_scan, CaseCutoffs, DechCase};
use crate::xsection::fig2::fig2_data;
use crate::xsection::sumrules::{sum_rule_second_moment, thorn_first_moments, FirstMomentReport, SumRuleReport};
use crate::xsection::{atom_table, electron_table, FormFactorModel, QGrid, ThornDescriptor};

#[derive(Debug, Parser)]
#[command(name = "thornsim", version, about = "Channeling Monte Carlo with classical and semi-classical thorn scattering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to THORNSIM_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Quantum and classical differential cross sections of one thorn.
    Xsection {
        #[arg(long)]
        thorn: Option<ThornChoice>,
    },
    /// First- and second-moment sum rules.
    Sumrules,
    /// Classical over quantum single-collision dechanneling cross section.
    DechRatio {
        #[arg(long, default_value = "electron")]
        case: DechCase,
        /// Critical transfer q_c, MeV.
        #[arg(long, default_value_t = 1.0)]
        qc: f64,
        /// Also print the ratio on a log scan of q_c.
        #[arg(long)]
        scan: bool,
    },
    /// Ensemble of one model, or of both without pairing.
    Simulate {
        #[arg(long)]
        model: Option<ModelChoice>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        depth_um: Option<f64>,
        /// Correlated thermal vibrations with this cutoff wavelength, nm.
        #[arg(long)]
        lambda_c_nm: Option<f64>,
    },
    /// Both models on shared seeds with paired statistics.
    Compare {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        depth_um: Option<f64>,
        #[arg(long)]
        lambda_c_nm: Option<f64>,
    },
    /// Plane-integrated thorn profiles and the continuum potential.
    Profile,
    /// q^4 dσ of the phenomenological thorn, Born and classical.
    Fig2,
}

impl std::str::FromStr for ThornChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phenomenological" => Ok(ThornChoice::Phenomenological),
            "atom" => Ok(ThornChoice::Atom),
            "electron" => Ok(ThornChoice::Electron),
            other => Err(Error::config("xsection.thorn", format!("unknown thorn `{other}`"))),
        }
    }
}

/// What a command printed and wrote.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn write(&mut self, path: PathBuf, text: &str) -> Result<()> {
        write_file(&path, text)?;
        self.files.push(path);
        Ok(())
    }
}

/// Machine-readable error record for stderr.
pub fn error_record(e: &Error) -> String {
    json!({"error": e.kind(), "message": e.to_string()}).to_string()
}

/// Parses arguments (first item is the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::config("<args>", e.to_string()))?;
    execute(&cli)
}

/// Config file (or defaults) with the command-line overrides applied.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.directory = o.clone();
    }
    match &cli.command {
        Command::Xsection { thorn: Some(t) } => cfg.xsection.thorn = *t,
        Command::Simulate {
            model,
            n,
            depth_um,
            lambda_c_nm,
        } => {
            if let Some(m) = model {
                cfg.run.model = *m;
            }
            apply_run_flags(&mut cfg, *n, *depth_um, *lambda_c_nm);
        }
        Command::Compare { n, depth_um, lambda_c_nm } => {
            cfg.run.model = ModelChoice::Both;
            apply_run_flags(&mut cfg, *n, *depth_um, *lambda_c_nm);
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_run_flags(cfg: &mut RunConfig, n: Option<usize>, depth_um: Option<f64>, lambda_c_nm: Option<f64>) {
    if let Some(n) = n {
        cfg.run.n_trajectories = n;
    }
    if let Some(d) = depth_um {
        cfg.run.depth_um = d;
    }
    if let Some(l) = lambda_c_nm {
        cfg.run.correlations.enabled = true;
        cfg.run.correlations.lambda_c_nm = Some(l);
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    let prov = Provenance::new(cfg.hash());
    let dir = cfg.output.directory.clone();
    let mut out = Outcome::default();
    match &cli.command {
        Command::Xsection { .. } => xsection(&cfg, &prov, &dir, &mut out)?,
        Command::Sumrules => sumrules(&cfg, &prov, &dir, &mut out)?,
        Command::DechRatio { case, qc, scan } => dech(&cfg, *case, *qc, *scan, &mut out)?,
        Command::Simulate { .. } => simulate(&cfg, &prov, &dir, &mut out)?,
        Command::Compare { .. } => compare(&cfg, &prov, &dir, &mut out)?,
        Command::Profile => profile(&cfg, &prov, &dir, &mut out)?,
        Command::Fig2 => fig2(&cfg, &prov, &dir, &mut out)?,
    }
    if !matches!(cli.command, Command::DechRatio { .. }) {
        out.write(dir.join("config.json"), &(cfg.to_json() + "\n"))?;
    }
    Ok(out)
}

fn phenomenological(cfg: &RunConfig) -> Result<PhenomenologicalThorn> {
    let x = &cfg.xsection;
    let crystal = cfg.crystal_model();
    PhenomenologicalThorn::new(
        x.z_eff.unwrap_or(crystal.z as f64),
        x.r_max_nm.unwrap_or(crystal.u1_nm),
        x.r_min_nm.unwrap_or(crystal.r_n_nm),
    )
}

/// Rows (q, dσ_quant/d²q, dσ_class/d²q) for the configured thorn.
pub fn xsection_rows(cfg: &RunConfig) -> Result<Vec<[f64; 3]>> {
    let x = &cfg.xsection;
    let crystal = cfg.crystal_model();
    let z = crystal.z as f64;
    let screening = ScreeningModel::moliere(crystal.a_tf_nm, crystal.r_n_nm);
    let ff = FormFactorModel::from_screening(&screening, z);
    let (quantum, thorn, center) = match x.thorn {
        ThornChoice::Phenomenological => {
            let t = phenomenological(cfg)?;
            let data = fig2_data(&t, x.q_min_mev, x.q_max_mev, x.per_decade)?;
            let za = t.z_eff * crate::units::ALPHA * crate::units::HBAR_C;
            return Ok(data
                .rows
                .iter()
                .map(|r| {
                    let ruth = 4.0 * za * za / r.q_mev.powi(4);
                    [r.q_mev, r.quantum * ruth, r.classical * ruth]
                })
                .collect());
        }
        ThornChoice::Atom => {
            let u = x.u_t_nm.unwrap_or(crystal.u1_nm);
            let grid = QGrid::new(x.q_min_mev, x.q_max_mev, x.per_decade, 16)?;
            let q = atom_table(&ff, [u, 0.0], crystal.u1_nm, grid, false)?;
            let vib = ThornVib {
                z,
                screening: screening.clone(),
                u1: crystal.u1_nm,
                u: [u, 0.0, 0.0],
            };
            (q, vib.thorn(), [u, 0.0])
        }
        ThornChoice::Electron => {
            if x.shell >= ff.shells.len() {
                return Err(Error::config("xsection.shell", format!("the atom has {} shells", ff.shells.len())));
            }
            let s = x.s_t_nm.unwrap_or(crystal.a_tf_nm);
            let grid = QGrid::new(x.q_min_mev, x.q_max_mev, x.per_decade, 16)?;
            let q = electron_table(&ff, x.shell, [s, 0.0], grid, false)?;
            let e = ThornElectron::new(ff.shells[x.shell].orbital, [s, 0.0, 0.0], [0.0; 3]);
            (q, e.thorn(), [s, 0.0])
        }
    };
    let kicker = ThornKicker::new(&thorn, 64)?;
    let impact = ImpactGrid {
        center,
        b_min: 1e-3 * crystal.r_n_nm,
        b_max: 40.0 / screening.mu_min(),
        per_decade: 32,
        n_angle: 32,
    };
    let grid = QGrid::new(x.q_min_mev, x.q_max_mev, x.per_decade, 16)?;
    let classical = classical_dsigma(&kicker, &impact, grid, ThornDescriptor::Other("classical".into()))?;
    let edges = quantum.q_edges();
    let (dq, dc) = (quantum.row_density(), classical.row_density());
    Ok((0..dq.len()).map(|i| [(edges[i] * edges[i + 1]).sqrt(), dq[i], dc[i]]).collect())
}

fn xsection(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let rows = xsection_rows(cfg)?;
    if cfg.output.wants(Format::Csv) {
        let text = csv_text(prov, &["q_MeV", "dsigma_quant_nm2_per_MeV2", "dsigma_class_nm2_per_MeV2"], &rows);
        out.write(dir.join("xsection.csv"), &text)?;
    }
    let edge = rows.iter().rev().find(|r| r[2] > 0.0).map_or(0.0, |r| r[0]);
    out.stdout = format!(
        "{:?} thorn: {} rows, classical support ends near q = {edge:.4e} MeV\n",
        cfg.xsection.thorn,
        rows.len()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SumRules {
    second_moment: Vec<SumRuleReport>,
    first_moment: FirstMomentReport,
}

fn sumrules(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let base = phenomenological(cfg)?;
    let mut second = Vec::new();
    let mut text = String::from("second moment, classical / quantum:\n");
    for ratio in [1e-3, 1e-2] {
        let t = PhenomenologicalThorn::new(base.z_eff, base.r_max, ratio * base.r_max)?;
        let r = sum_rule_second_moment(&t)?;
        text += &format!(
            "  r_min/r_max = {ratio:e}: quantum {:.6e}, classical {:.6e} MeV^2 nm^2, ratio {:.5}\n",
            r.second_moment_quantum.value, r.second_moment_classical.value, r.ratio
        );
        second.push(r);
    }
    let first = thorn_first_moments(&cfg.crystal_model(), 16)?;
    text += "first moment |integral q dσ| / integral |q| dσ:\n";
    text += &format!(
        "  atom (Born) {:.3e}\n  electron (Born) {:.3e}\n  atom (classical) {:.3e}\n",
        first.atom_quantum.relative(),
        first.electron_quantum.relative(),
        first.atom_classical.relative()
    );
    if cfg.output.wants(Format::Json) {
        let report = SumRules {
            second_moment: second,
            first_moment: first,
        };
        out.write(dir.join("sumrules.json"), &json_text(prov, &report)?)?;
    }
    out.stdout = text;
    Ok(())
}

fn dech(cfg: &RunConfig, case: DechCase, qc: f64, scan: bool, out: &mut Outcome) -> Result<()> {
    let crystal = cfg.crystal_model();
    let (e, m) = (cfg.beam.energy_mev, cfg.beam.particle.mass_mev());
    let r = dech_ratio(case, &crystal, e, m, qc)?;
    let mut s = format!("case {case:?}, q_c = {qc} MeV, Z_eff = {}, r_max = {} nm\n", r.cutoffs.z_eff, r.cutoffs.r_max);
    for est in [&r.quantum, &r.classical] {
        s += &format!(
            "  {:<9} q_min = {:.4e} MeV  numeric {:.6e} nm^2  closed form {:.6e} nm^2\n",
            format!("{:?}", est.model).to_lowercase(),
            est.q_min,
            est.sigma_numeric,
            est.sigma_closed_form
        );
    }
    s += &format!("ratio = {:.2} (closed form {:.4}, numeric {:.4})\n", r.ratio, r.ratio, r.ratio_numeric);
    if case == DechCase::Atom {
        let cut = CaseCutoffs::new(case, &crystal, e, m)?;
        if let Ok(q) = cut.invert_ratio(1.43) {
            s += &format!("ratio 1.43 is reached at q_c = {q:.4} MeV\n");
        }
    }
    if scan {
        let cut = r.cutoffs;
        let qs: Vec<f64> = (0..=16).map(|i| 0.1 * 10f64.powf(i as f64 / 8.0)).collect();
        let rows: Vec<Vec<f64>> = ratio_scan(&cut, &qs).into_iter().map(|(q, v)| vec![q, v]).collect();
        s += &format_table(&["q_c_MeV", "ratio"], &rows);
    }
    out.stdout = s;
    Ok(())
}

fn build_context(cfg: &RunConfig, models: &[ModelKind]) -> Result<TransportContext> {
    TransportContext::build(
        &cfg.crystal_model(),
        &cfg.beam,
        cfg.depth_nm(),
        cfg.lambda_c_nm(),
        models,
        &cfg.transport,
    )
}

fn write_model(
    cfg: &RunConfig,
    prov: &Provenance,
    dir: &Path,
    ens: &EnsembleOutput,
    res: &SimulationResult,
    out: &mut Outcome,
) -> Result<()> {
    if cfg.output.wants(Format::Csv) {
        out.write(dir.join("survival.csv"), &survival_csv(prov, &res.survival))?;
    }
    if cfg.output.wants(Format::Jsonl) && ens.model == ModelKind::Scm {
        out.write(dir.join("events.jsonl"), &events_jsonl(prov, ens)?)?;
    }
    if cfg.output.wants(Format::Json) {
        out.write(dir.join("summary.json"), &json_text(prov, res)?)?;
    }
    Ok(())
}

fn describe(res: &SimulationResult, depth_um: f64) -> String {
    let f = res.survival.fraction.last().copied().unwrap_or(1.0);
    let l = &res.dechanneling_length;
    format!(
        "{}: dechanneled {:.4} at {depth_um} um, L_d = {:.3} +- {:.3} um ({:?}), {} kinks, {} atom impulses, wall {:.2} s\n",
        res.model.as_str(),
        1.0 - f,
        l.l_um,
        l.err_um,
        l.status,
        res.stats.kinks,
        res.stats.atom_impulses,
        res.wall_time_s
    )
}

fn run_models(cfg: &RunConfig, models: &[ModelKind]) -> Result<Vec<(EnsembleOutput, SimulationResult)>> {
    let ctx = build_context(cfg, models)?;
    let threads = resolve_threads(cfg.run.threads);
    models
        .iter()
        .map(|&m| {
            let ens = run_ensemble(&ctx, m, cfg.run.n_trajectories, cfg.run.seed, threads)?;
            let res = summarize(&ens, cfg.depth_nm(), cfg.analysis.bins, cfg.analysis.fit_window)?;
            Ok((ens, res))
        })
        .collect()
}

fn simulate(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let models = cfg.run.model.kinds();
    let runs = run_models(cfg, &models)?;
    let single = runs.len() == 1;
    for (ens, res) in &runs {
        let d = if single { dir.to_path_buf() } else { dir.join(ens.model.as_str()) };
        write_model(cfg, prov, &d, ens, res, out)?;
        out.stdout += &describe(res, cfg.run.depth_um);
    }
    Ok(())
}

/// Runs both models on shared seeds and compares them.
pub fn compare_models(cfg: &RunConfig) -> Result<(Comparison, [(EnsembleOutput, SimulationResult); 2])> {
    let mut runs = run_models(cfg, &[ModelKind::Cm, ModelKind::Scm])?;
    let scm = runs.pop().expect("two runs");
    let cm = runs.pop().expect("two runs");
    let c = compare_outputs(&cm.0, &scm.0, cfg.depth_nm(), &cm.1.dechanneling_length, &scm.1.dechanneling_length)?;
    Ok((c, [cm, scm]))
}

fn compare(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let (c, [cm, scm]) = compare_models(cfg)?;
    for (ens, res) in [&cm, &scm] {
        write_model(cfg, prov, &dir.join(ens.model.as_str()), ens, res, out)?;
        out.stdout += &describe(res, cfg.run.depth_um);
    }
    if cfg.output.wants(Format::Csv) {
        out.write(dir.join("survival_paired.csv"), &paired_survival_csv(prov, &cm.1.survival, &scm.1.survival)?)?;
    }
    if cfg.output.wants(Format::Json) {
        let v = json!({
            "comparison": c,
            "cm_dechanneling_length": cm.1.dechanneling_length,
            "scm_dechanneling_length": scm.1.dechanneling_length,
        });
        out.write(dir.join("compare.json"), &json_text(prov, &v)?)?;
    }
    out.stdout += &format!(
        "dechanneled at {} um: CM {:.4}, SCM {:.4}, difference {:.4} +- {:.4} (95% lower bound {:.4})\nCM >= SCM at 95%: {}\nL_d(CM) / L_d(SCM) = {:.3}\nL_d(CM) < L_d(SCM): {}\n",
        c.final_depth_um, c.cm_dechanneled, c.scm_dechanneled, c.difference, c.stderr, c.lower_95, c.cm_ge_scm, c.ld_ratio, c.cm_ld_shorter
    );
    Ok(())
}

/// Plane-integrated profiles along x of an atom displaced by u1 x, the
/// smeared atom, their difference, the electron thorn of the innermost
/// shell with its electron one orbital radius out, and that thorn's cloud
/// density on the x axis.
pub fn profile_rows(cfg: &RunConfig, n: usize) -> Result<Vec<[f64; 6]>> {
    let crystal = cfg.crystal_model();
    let z = crystal.z as f64;
    let u1 = crystal.u1_nm;
    let screening = ScreeningModel::moliere(crystal.a_tf_nm, crystal.r_n_nm);
    let part = |center: [f64; 3], shape: RadialShape| Thorn {
        parts: vec![ThornPart {
            center,
            scale: 1.0,
            shape,
        }],
    };
    let atom = part([u1, 0.0, 0.0], RadialShape::Atomic {
        z,
        screening: screening.clone(),
    });
    let smeared = part([0.0; 3], RadialShape::SmearedAtomic {
        z,
        screening: screening.clone(),
        u1,
    });
    let vib = ThornVib {
        z,
        screening: screening.clone(),
        u1,
        u: [u1, 0.0, 0.0],
    }
    .thorn();
    let ff = FormFactorModel::from_screening(&screening, z);
    let orbital = ff
        .shells
        .iter()
        .map(|s| s.orbital)
        .max_by(|a, b| a.beta.total_cmp(&b.beta))
        .ok_or_else(|| Error::domain("screening model without terms"))?;
    let electron = ThornElectron::new(orbital, [orbital.radius(), 0.0, 0.0], [0.0; 3]);
    let e_thorn = electron.thorn();
    let axis = [1.0, 0.0, 0.0];
    let half = 6.0 * u1;
    // an even count keeps x = 0, where the cloud density diverges, off the grid
    let n = n + n % 2;
    (0..n)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            Ok([
                x,
                atom.plane_profile(axis, x)?,
                smeared.plane_profile(axis, x)?,
                vib.plane_profile(axis, x)?,
                e_thorn.plane_profile(axis, x)?,
                crate::potentials::thorn_electron_density([x, 0.0, 0.0], &electron),
            ])
        })
        .collect()
}

fn profile(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let rows = profile_rows(cfg, 240)?;
    let ctx = build_context(cfg, &[])?;
    let v = ctx.continuum();
    let charge = cfg.beam.particle.charge_sign();
    let d = v.period()[0];
    let pot: Vec<[f64; 2]> = (0..=400)
        .map(|i| {
            let x = d * i as f64 / 400.0;
            [x, v.potential_energy_ev([x, 0.5 * v.period()[1]], charge)]
        })
        .collect();
    if cfg.output.wants(Format::Csv) {
        let cols = [
            "x_nm",
            "v_atom_eV_nm2",
            "v_smeared_eV_nm2",
            "dv_vib_eV_nm2",
            "dv_e_eV_nm2",
            "cloud_density_per_nm3",
        ];
        out.write(dir.join("profile.csv"), &csv_text(prov, &cols, &rows))?;
        out.write(dir.join("continuum.csv"), &csv_text(prov, &["x_nm", "u_eV"], &pot))?;
    }
    out.stdout = format!(
        "thorn profiles over |x| <= {:.4} nm, continuum depth U0 = {:.3} eV\n",
        rows.last().map_or(0.0, |r| r[0]),
        ctx.u0_ev
    );
    Ok(())
}

fn fig2(cfg: &RunConfig, prov: &Provenance, dir: &Path, out: &mut Outcome) -> Result<()> {
    let t = phenomenological(cfg)?;
    let x = &cfg.xsection;
    let data = fig2_data(&t, x.q_min_mev, x.q_max_mev, x.per_decade)?;
    let za = t.z_eff * crate::units::ALPHA * crate::units::HBAR_C;
    let base = 4.0 * za * za;
    let rows: Vec<[f64; 5]> = data
        .rows
        .iter()
        .map(|r| [r.q_mev, base * r.quantum, base * r.classical, r.quantum, r.classical])
        .collect();
    if cfg.output.wants(Format::Csv) {
        let cols = [
            "q_MeV",
            "q4_dsigma_quant_MeV2_nm2",
            "q4_dsigma_class_MeV2_nm2",
            "quant_over_rutherford",
            "class_over_rutherford",
        ];
        out.write(dir.join("fig2.csv"), &csv_text(prov, &cols, &rows))?;
    }
    out.stdout = format!(
        "largest classical transfer {:.4} MeV at b = {:.3e} nm; Rutherford q^4 dσ = {:.4e} MeV^2 nm^2\n",
        data.max_kick_mev, data.b_at_max_nm, base
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"run": {"seed": 5, "n_trajectories": 10}}"#).unwrap();
        let cli = Cli::try_parse_from(["thornsim", "simulate", "--config", p.to_str().unwrap(), "--seed", "9", "--n", "3"]).unwrap();
        let cfg = load_config(&cli).unwrap();
        assert_eq!(cfg.run.seed, 9);
        assert_eq!(cfg.run.n_trajectories, 3);
    }

    #[test]
    fn zero_trajectories_is_a_validation_error() {
        let e = run_from_args(["thornsim", "simulate", "--model", "scm", "--n", "0"]).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "run.n_trajectories"));
        let rec: serde_json::Value = serde_json::from_str(&error_record(&e)).unwrap();
        assert_eq!(rec["error"], "config");
    }

    #[test]
    fn electron_ratio_is_printed() {
        let o = run_from_args(["thornsim", "dech-ratio", "--case", "electron", "--qc", "1.0"]).unwrap();
        assert!(o.stdout.contains("ratio = 1.97"), "{}", o.stdout);
        assert!(o.files.is_empty());
    }

    #[test]
    fn profile_shows_cancellation_between_the_scales() {
        let cfg = RunConfig::default();
        let rows = profile_rows(&cfg, 120).unwrap();
        let u1 = cfg.crystal_model().u1_nm;
        let (mut peak, mut at) = (0.0, 0.0);
        for r in &rows {
            if r[3].abs() > peak {
                peak = r[3].abs();
                at = r[0];
            }
            if r[0].abs() >= 3.0 * u1 {
                // atom and smeared atom nearly cancel away from the nucleus
                assert!(r[3].abs() < 0.2 * r[1], "{r:?}");
                // dipole-like: the residual takes the sign of x
                assert_eq!(r[3].signum(), r[0].signum());
            }
            assert!(r[5].is_finite());
        }
        assert!((at - u1).abs() < u1, "peak at {at}");
        for r in &rows {
            assert!((r[1] - r[2] - r[3]).abs() < 1e-9 * r[1].abs().max(1.0));
        }
    }
}
