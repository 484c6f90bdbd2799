//! Result files. CSV files open with a `#` comment line and JSON files carry
//! a header object, both naming the tool version and the config hash.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::transport::{EnsembleOutput, SurvivalCurve};
use crate::units::NM_PER_UM;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(config_sha256: impl Into<String>) -> Self {
        Self {
            config_sha256: config_sha256.into(),
        }
    }

    pub fn csv_comment(&self) -> String {
        format!("# thornsim {VERSION} config_sha256={}\n", self.config_sha256)
    }

    pub fn header(&self) -> serde_json::Value {
        json!({"tool": "thornsim", "version": VERSION, "config_sha256": self.config_sha256})
    }
}

/// Writes a CSV with the provenance comment, a header row and one line per row.
pub fn csv_text<R: AsRef<[f64]>>(prov: &Provenance, columns: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut s = prov.csv_comment();
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn survival_csv(prov: &Provenance, curve: &SurvivalCurve) -> String {
    let rows = (0..curve.depth_um.len()).map(|i| [curve.depth_um[i], curve.fraction[i], curve.stderr[i]]);
    csv_text(prov, &["depth_um", "fraction", "stderr"], rows)
}

/// Survival of both models side by side on the same depth grid.
pub fn paired_survival_csv(prov: &Provenance, cm: &SurvivalCurve, scm: &SurvivalCurve) -> Result<String> {
    if cm.depth_um != scm.depth_um {
        return Err(Error::Statistics("paired curves need the same depth grid".into()));
    }
    let rows = (0..cm.depth_um.len()).map(|i| [cm.depth_um[i], cm.fraction[i], cm.stderr[i], scm.fraction[i], scm.stderr[i]]);
    Ok(csv_text(
        prov,
        &["depth_um", "fraction_cm", "stderr_cm", "fraction_scm", "stderr_scm"],
        rows,
    ))
}

#[derive(Serialize)]
struct EventLine<'a> {
    traj: u64,
    z_um: f64,
    kind: &'a str,
    #[serde(rename = "qx_MeV")]
    qx_mev: f64,
    #[serde(rename = "qy_MeV")]
    qy_mev: f64,
    #[serde(rename = "eperp_before_eV")]
    eperp_before_ev: f64,
    #[serde(rename = "eperp_after_eV")]
    eperp_after_ev: f64,
}

/// One kink per line in trajectory order, after a header line.
pub fn events_jsonl(prov: &Provenance, out: &EnsembleOutput) -> Result<String> {
    let mut s = serde_json::to_string(&prov.header())?;
    s.push('\n');
    for (rec, log) in out.records.iter().zip(&out.kinks) {
        for e in &log.events {
            let line = EventLine {
                traj: rec.index,
                z_um: e.z_nm / NM_PER_UM,
                kind: e.kind.as_str(),
                qx_mev: e.q[0],
                qy_mev: e.q[1],
                eperp_before_ev: e.eperp_before_ev,
                eperp_after_ev: e.eperp_after_ev,
            };
            s.push_str(&serde_json::to_string(&line)?);
            s.push('\n');
        }
    }
    Ok(s)
}

/// Pretty JSON of `value` with the provenance header merged in.
pub fn json_text<T: Serialize>(prov: &Provenance, value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    if let serde_json::Value::Object(map) = &mut v {
        if let serde_json::Value::Object(h) = prov.header() {
            for (k, x) in h {
                map.insert(k, x);
            }
        }
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Short fixed-width table for terminal output.
pub fn format_table(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for c in columns {
        let _ = write!(s, "{c:>16}");
    }
    s.push('\n');
    for r in rows {
        for v in r {
            let _ = write!(s, "{v:>16.6e}");
        }
        s.push('\n');
    }
    s
}
