//! Channeled fraction versus depth and the dechanneling length.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::NM_PER_UM;

/// Fraction of trajectories still channeled at each depth, binomial errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub depth_um: Vec<f64>,
    pub fraction: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
}

/// `escapes[i]` is the dechanneling depth (nm) of trajectory i, if any.
/// A trajectory counts as channeled at z while its escape depth exceeds z.
pub fn survival_curve(escapes: &[Option<f64>], depth_nm: f64, bins: usize) -> Result<SurvivalCurve> {
    if escapes.is_empty() {
        return Err(Error::Statistics("survival curve of an empty ensemble".into()));
    }
    if bins == 0 || !(depth_nm > 0.0) {
        return Err(Error::config("output.bins", "need at least one bin over a positive depth"));
    }
    let n = escapes.len();
    let mut depth_um = Vec::with_capacity(bins + 1);
    let mut fraction = Vec::with_capacity(bins + 1);
    let mut stderr = Vec::with_capacity(bins + 1);
    for i in 0..=bins {
        let z = depth_nm * i as f64 / bins as f64;
        let alive = escapes.iter().filter(|e| e.is_none_or(|d| d > z)).count();
        let f = alive as f64 / n as f64;
        depth_um.push(z / NM_PER_UM);
        fraction.push(f);
        stderr.push((f * (1.0 - f) / n as f64).sqrt());
    }
    Ok(SurvivalCurve {
        depth_um,
        fraction,
        stderr,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// No trajectory left the channel inside the window.
    NoDecay,
    /// Deaths fall into fewer than two depth bins of the window.
    TooFewEvents,
}

/// Exponential tail fit of the survival curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdFit {
    pub l_um: f64,
    pub err_um: f64,
    /// Variance of L_d, um^2.
    pub variance_um2: f64,
    pub window_um: [f64; 2],
    pub events: usize,
    pub at_risk: usize,
    pub status: FitStatus,
}

/// Sub-bins of the window used for the "at least two bins with deaths" check.
const WINDOW_BINS: usize = 10;

/// Fits S(z) ~ exp(-z / L_d) over `window_nm` by maximum likelihood on the
/// escape depths: trajectories channeled at the window start contribute
/// their exposure inside the window, escapes count as events, so
/// 1 / L_d = events / exposure with relative error 1 / sqrt(events).
pub fn estimate_dechanneling_length(escapes: &[Option<f64>], window_nm: [f64; 2]) -> Result<LdFit> {
    let [a, b] = window_nm;
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::config("fit.window", "need 0 <= start < end"));
    }
    if escapes.is_empty() {
        return Err(Error::Statistics("dechanneling fit of an empty ensemble".into()));
    }
    let mut exposure = 0.0;
    let mut events = 0usize;
    let mut at_risk = 0usize;
    let mut hit_bins = [false; WINDOW_BINS];
    for e in escapes {
        match *e {
            Some(d) if d <= a => continue,
            Some(d) if d <= b => {
                at_risk += 1;
                events += 1;
                exposure += d - a;
                let k = (((d - a) / (b - a)) * WINDOW_BINS as f64).ceil() as usize;
                hit_bins[k.clamp(1, WINDOW_BINS) - 1] = true;
            }
            _ => {
                at_risk += 1;
                exposure += b - a;
            }
        }
    }
    let window_um = [a / NM_PER_UM, b / NM_PER_UM];
    if events == 0 {
        return Ok(LdFit {
            l_um: f64::INFINITY,
            err_um: f64::INFINITY,
            variance_um2: f64::INFINITY,
            window_um,
            events,
            at_risk,
            status: FitStatus::NoDecay,
        });
    }
    let l = exposure / events as f64 / NM_PER_UM;
    let var = l * l / events as f64;
    let status = if hit_bins.iter().filter(|h| **h).count() < 2 {
        FitStatus::TooFewEvents
    } else {
        FitStatus::Ok
    };
    Ok(LdFit {
        l_um: l,
        err_um: var.sqrt(),
        variance_um2: var,
        window_um,
        events,
        at_risk,
        status,
    })
}
