//! Run configuration: JSON in, fully resolved and validated struct out.
//!
//! Every block is optional. Missing values come from the crystal preset
//! (default `Si`, the (110) planar channel) and the defaults below. The top
//! level also accepts the shorthands `preset`, `E_MeV` and `particle`.
//!
//! Precedence, highest first: command-line flags, the config file, preset
//! and built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{BeamConfig, ChannelGeometry, CrystalModel, EntryDistribution, Particle};
use crate::transport::{ModelKind, TransportOptions};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalBlock {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub z: Option<u32>,
    pub lattice_constant_nm: Option<f64>,
    pub geometry: Option<ChannelGeometry>,
    pub u1_nm: Option<f64>,
    pub a_tf_nm: Option<f64>,
    pub r_n_nm: Option<f64>,
    pub u0_ev: Option<f64>,
}

impl CrystalBlock {
    fn resolve(&mut self) -> Result<()> {
        let preset = self.preset.get_or_insert_with(|| "Si".into()).clone();
        let base = CrystalModel::preset(&preset)?;
        self.name.get_or_insert(base.name);
        self.z.get_or_insert(base.z);
        self.lattice_constant_nm.get_or_insert(base.lattice_constant_nm);
        self.geometry.get_or_insert(base.geometry);
        self.u1_nm.get_or_insert(base.u1_nm);
        self.a_tf_nm.get_or_insert(base.a_tf_nm);
        self.r_n_nm.get_or_insert(base.r_n_nm);
        if self.u0_ev.is_none() {
            self.u0_ev = base.u0_ev;
        }
        Ok(())
    }

    /// The crystal described by a resolved block.
    pub fn model(&self) -> CrystalModel {
        let base = CrystalModel::si_110();
        CrystalModel {
            name: self.name.clone().unwrap_or(base.name),
            z: self.z.unwrap_or(base.z),
            lattice_constant_nm: self.lattice_constant_nm.unwrap_or(base.lattice_constant_nm),
            geometry: self.geometry.clone().unwrap_or(base.geometry),
            u1_nm: self.u1_nm.unwrap_or(base.u1_nm),
            a_tf_nm: self.a_tf_nm.unwrap_or(base.a_tf_nm),
            r_n_nm: self.r_n_nm.unwrap_or(base.r_n_nm),
            u0_ev: self.u0_ev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Cm,
    Scm,
    Both,
}

impl ModelChoice {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelChoice::Cm => vec![ModelKind::Cm],
            ModelChoice::Scm => vec![ModelKind::Scm],
            ModelChoice::Both => vec![ModelKind::Cm, ModelKind::Scm],
        }
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cm" => Ok(ModelChoice::Cm),
            "scm" => Ok(ModelChoice::Scm),
            "both" => Ok(ModelChoice::Both),
            other => Err(Error::config("run.model", format!("expected cm, scm or both, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct CorrelationBlock {
    pub enabled: bool,
    /// Cutoff wavelength; ten lattice constants when absent.
    pub lambda_c_nm: Option<f64>,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub model: ModelChoice,
    pub n_trajectories: usize,
    pub depth_um: f64,
    pub seed: u64,
    /// Worker threads. Not part of the echo or the hash: results do not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    pub correlations: CorrelationBlock,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            model: ModelChoice::Both,
            n_trajectories: 500,
            depth_um: 10.0,
            seed: 1,
            threads: None,
            correlations: CorrelationBlock::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisBlock {
    /// Depth bins of the survival curve.
    pub bins: usize,
    /// L_d fit window as fractions of the depth.
    pub fit_window: [f64; 2],
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            bins: 50,
            fit_window: [0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThornChoice {
    /// Screened Coulomb thorn between r_min and r_max.
    Phenomenological,
    /// Vibrating atom displaced by u_T.
    Atom,
    /// Atomic electron at transverse offset s_T.
    Electron,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XsectionBlock {
    pub thorn: ThornChoice,
    /// Phenomenological thorn; default Z of the crystal.
    pub z_eff: Option<f64>,
    /// Default u1.
    pub r_max_nm: Option<f64>,
    /// Default r_N.
    pub r_min_nm: Option<f64>,
    /// Atom thorn displacement; default u1.
    pub u_t_nm: Option<f64>,
    /// Electron thorn offset; default a_TF.
    pub s_t_nm: Option<f64>,
    pub shell: usize,
    #[serde(rename = "q_min_MeV")]
    pub q_min_mev: f64,
    #[serde(rename = "q_max_MeV")]
    pub q_max_mev: f64,
    pub per_decade: usize,
}

impl Default for XsectionBlock {
    fn default() -> Self {
        Self {
            thorn: ThornChoice::Phenomenological,
            z_eff: None,
            r_max_nm: None,
            r_min_nm: None,
            u_t_nm: None,
            s_t_nm: None,
            shell: 0,
            q_min_mev: 1e-3,
            q_max_mev: 100.0,
            per_decade: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Jsonl,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Not part of the echo or the hash.
    #[serde(skip_serializing)]
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("thornsim-out"),
            formats: vec![Format::Csv, Format::Jsonl, Format::Json],
        }
    }
}

impl OutputBlock {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub crystal: CrystalBlock,
    #[serde(default = "default_beam")]
    pub beam: BeamConfig,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub transport: TransportOptions,
    #[serde(default)]
    pub analysis: AnalysisBlock,
    #[serde(default)]
    pub xsection: XsectionBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

fn default_beam() -> BeamConfig {
    BeamConfig {
        particle: Particle::Electron,
        energy_mev: 1000.0,
        entry_angle_mrad: 0.0,
        entry: EntryDistribution::Uniform,
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut c = Self {
            crystal: CrystalBlock::default(),
            beam: default_beam(),
            run: RunBlock::default(),
            transport: TransportOptions::default(),
            analysis: AnalysisBlock::default(),
            xsection: XsectionBlock::default(),
            output: OutputBlock::default(),
        };
        c.resolve().expect("built-in defaults are valid");
        c
    }
}

/// Reads, resolves and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(mut top) = value else {
        return Err(Error::config("<root>", "config must be a JSON object"));
    };
    expand_shorthands(&mut top)?;
    let mut cfg: RunConfig =
        serde_path_to_error::deserialize(Value::Object(top)).map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
    cfg.resolve()?;
    Ok(cfg)
}

/// Moves the top-level shorthands into their blocks.
fn expand_shorthands(top: &mut Map<String, Value>) -> Result<()> {
    // (shorthand, block, key); the beam needs a particle when only E_MeV is given
    const MOVES: [(&str, &str, &str); 3] = [("preset", "crystal", "preset"), ("E_MeV", "beam", "E_MeV"), ("particle", "beam", "particle")];
    for (short, block, key) in MOVES {
        let Some(v) = top.remove(short) else { continue };
        let entry = top.entry(block).or_insert_with(|| Value::Object(Map::new()));
        let Value::Object(obj) = entry else {
            return Err(Error::config(block, "must be an object"));
        };
        if obj.contains_key(key) {
            return Err(Error::config(short, format!("given both at the top level and in `{block}`")));
        }
        obj.insert(key.into(), v);
    }
    if let Some(Value::Object(beam)) = top.get_mut("beam") {
        let d = default_beam();
        beam.entry("particle").or_insert_with(|| serde_json::to_value(d.particle).expect("enum serializes"));
        beam.entry("E_MeV").or_insert_with(|| Value::from(d.energy_mev));
    }
    Ok(())
}

impl RunConfig {
    /// Fills every preset-dependent default and checks all invariants.
    pub fn resolve(&mut self) -> Result<()> {
        self.crystal.resolve()?;
        let crystal = self.crystal.model();
        let x = &mut self.xsection;
        x.z_eff.get_or_insert(crystal.z as f64);
        x.r_max_nm.get_or_insert(crystal.u1_nm);
        x.r_min_nm.get_or_insert(crystal.r_n_nm);
        x.u_t_nm.get_or_insert(crystal.u1_nm);
        x.s_t_nm.get_or_insert(crystal.a_tf_nm);
        self.run
            .correlations
            .lambda_c_nm
            .get_or_insert(10.0 * crystal.lattice_constant_nm);
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let crystal = self.crystal.model();
        crystal.validate()?;
        self.beam.validate()?;
        let r = &self.run;
        if r.n_trajectories == 0 {
            return Err(Error::config("run.n_trajectories", "must be at least 1"));
        }
        if !(r.depth_um > 0.0 && r.depth_um.is_finite()) {
            return Err(Error::config("run.depth_um", "must be a positive depth"));
        }
        if r.threads == Some(0) {
            return Err(Error::config("run.threads", "must be at least 1"));
        }
        if let Some(l) = r.correlations.lambda_c_nm {
            if !(l > crystal.lattice_constant_nm) {
                return Err(Error::config("run.correlations.lambda_c_nm", "must exceed the lattice constant"));
            }
        }
        let t = &self.transport;
        if let Some(s) = t.step_nm {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config("transport.step_nm", "must be positive"));
            }
        }
        if !(t.record_every_nm > 0.0) {
            return Err(Error::config("transport.record_every_nm", "must be positive"));
        }
        if !(t.kernel.rate_scale >= 0.0 && t.kernel.rate_scale.is_finite()) {
            return Err(Error::config("transport.kernel.rate_scale", "must be non-negative"));
        }
        if !(t.cm.radius_lattice > 0.0 && t.cm.electron_reach > 0.0) {
            return Err(Error::config("transport.cm", "radius and electron reach must be positive"));
        }
        let a = &self.analysis;
        if a.bins == 0 {
            return Err(Error::config("analysis.bins", "must be at least 1"));
        }
        let [w0, w1] = a.fit_window;
        if !(0.0 <= w0 && w0 < w1 && w1 <= 1.0) {
            return Err(Error::config("analysis.fit_window", "fractions must satisfy 0 <= start < end <= 1"));
        }
        let x = &self.xsection;
        if !(x.q_min_mev > 0.0 && x.q_max_mev > x.q_min_mev) {
            return Err(Error::config("xsection.q_min_MeV", "need 0 < q_min < q_max"));
        }
        if x.per_decade == 0 {
            return Err(Error::config("xsection.per_decade", "must be at least 1"));
        }
        if let (Some(lo), Some(hi)) = (x.r_min_nm, x.r_max_nm) {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::config("xsection.r_min_nm", "need 0 < r_min < r_max"));
            }
        }
        if self.output.formats.is_empty() {
            return Err(Error::config("output.formats", "need at least one format"));
        }
        Ok(())
    }

    /// Canonical JSON of the resolved config, without the invocation-only
    /// thread count and output directory.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of [`RunConfig::to_json`], hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn crystal_model(&self) -> CrystalModel {
        self.crystal.model()
    }

    pub fn depth_nm(&self) -> f64 {
        self.run.depth_um * crate::units::NM_PER_UM
    }

    /// Correlation cutoff when correlated vibrations are on.
    pub fn lambda_c_nm(&self) -> Option<f64> {
        self.run.correlations.enabled.then_some(self.run.correlations.lambda_c_nm).flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_fully_populated() {
        let c = parse_config_str(r#"{"preset": "Si", "E_MeV": 1000}"#).unwrap();
        assert_eq!(c.crystal.preset.as_deref(), Some("Si"));
        assert_eq!(c.crystal.z, Some(14));
        assert_eq!(c.crystal.u1_nm, Some(0.0075));
        assert_eq!(c.crystal.a_tf_nm, Some(0.0194));
        assert_eq!(c.beam.energy_mev, 1000.0);
        assert_eq!(c.beam.particle, Particle::Electron);
        assert_eq!(c.xsection.z_eff, Some(14.0));
        assert!(c.run.correlations.lambda_c_nm.unwrap() > 5.0);
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let c = parse_config_str(r#"{"preset": "Si<100>", "beam": {"particle": "positron", "E_MeV": 500}, "run": {"threads": 3}}"#).unwrap();
        let once = c.to_json();
        let again = parse_config_str(&once).unwrap();
        assert_eq!(once, again.to_json());
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn hash_ignores_threads_and_directory() {
        let a = parse_config_str(r#"{"run": {"threads": 1}, "output": {"directory": "a"}}"#).unwrap();
        let b = parse_config_str(r#"{"run": {"threads": 4}, "output": {"directory": "b"}}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = parse_config_str(r#"{"run": {"seed": 2}}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_config_str(r#"{"run": {"n_trajectory": 5}}"#).unwrap_err();
        match e {
            Error::Config { key, message } => {
                assert!(key.contains("run"), "{key}");
                assert!(message.contains("n_trajectory"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_config_str(r#"{"colour": 1}"#).is_err());
    }

    #[test]
    fn physics_violations_are_rejected() {
        let e = parse_config_str(r#"{"crystal": {"u1_nm": 0}}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "crystal.u1_nm"), "{e:?}");
        let e = parse_config_str(r#"{"crystal": {"r_n_nm": 0.01}}"#).unwrap_err();
        assert!(matches!(e, Error::ScaleHierarchy(_)), "{e:?}");
        let e = parse_config_str(r#"{"run": {"n_trajectories": 0}}"#).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "run.n_trajectories"));
        assert!(parse_config_str(r#"{"preset": "Si", "crystal": {"preset": "Si"}}"#).is_err());
        assert!(parse_config_str(r#"{"preset": "Ge"}"#).is_err());
    }
}
