//! Single-collision dechanneling cross section: transfers above q_c eject
//! the particle at once, softer ones count with weight (q / q_c)^2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CrystalModel;
use crate::numerics::Quadrature;
use crate::units::{ALPHA, ELECTRON_MASS, HBAR_C};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteringModel {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DechCase {
    Atom,
    Electron,
}

impl std::str::FromStr for DechCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atom" => Ok(DechCase::Atom),
            "electron" => Ok(DechCase::Electron),
            other => Err(Error::config("case", format!("expected `atom` or `electron`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DechannelingEstimate {
    pub model: ScatteringModel,
    pub z_eff: f64,
    /// MeV.
    pub q_c: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Two-integral quadrature on the sharp-cutoff Rutherford model, nm^2.
    pub sigma_numeric: f64,
    /// 4 pi (Z alpha hbar c / q_c)^2 [2 ln(q_c / q_min) + 1], nm^2.
    pub sigma_closed_form: f64,
}

fn check_order(q_c: f64, q_min: f64, q_max: f64) -> Result<()> {
    if !(q_min > 0.0 && q_min <= q_c && q_c <= q_max) {
        return Err(Error::domain(format!(
            "need 0 < q_min <= q_c <= q_max, got q_min = {q_min}, q_c = {q_c}, q_max = {q_max} MeV"
        )));
    }
    Ok(())
}

/// Closed form of the dechanneling cross section, nm^2.
pub fn dech_closed_form(q_c: f64, q_min: f64, z_eff: f64) -> f64 {
    let za = z_eff * ALPHA * HBAR_C / q_c;
    4.0 * PI * za * za * (2.0 * (q_c / q_min).ln() + 1.0)
}

/// q_c^-2 integral_{q_min}^{q_c} q^2 dq^2 dσ/dq^2 + integral_{q_c}^{q_max} dq^2 dσ/dq^2
/// with dσ/dq^2 = 4 pi (Z alpha)^2 / q^4 between sharp cutoffs. Both integrals
/// are evaluated by quadrature in ln q.
pub fn dechanneling_xs(q_c: f64, q_min: f64, q_max: f64, z_eff: f64, model: ScatteringModel) -> Result<DechannelingEstimate> {
    check_order(q_c, q_min, q_max)?;
    let za = z_eff * ALPHA * HBAR_C;
    let pref = 4.0 * PI * za * za;
    // dq^2 = 2 q^2 d(ln q)
    let soft = |t: f64| {
        let q = t.exp();
        2.0 * q * q * q * q / (q_c * q_c) / q.powi(4)
    };
    let hard = |t: f64| {
        let q = t.exp();
        2.0 * q * q / q.powi(4)
    };
    let quad = Quadrature::new(0.0, 1e-12);
    let a = if q_c > q_min { quad.integrate(soft, q_min.ln(), q_c.ln())?.value } else { 0.0 };
    let b = if q_max > q_c { quad.integrate(hard, q_c.ln(), q_max.ln())?.value } else { 0.0 };
    Ok(DechannelingEstimate {
        model,
        z_eff,
        q_c,
        q_min,
        q_max,
        sigma_numeric: pref * (a + b),
        sigma_closed_form: dech_closed_form(q_c, q_min, z_eff),
    })
}

/// Cross-check with a smooth screened form dσ/dq^2 = 4 pi (Z alpha)^2 /
/// (q^2 + q_s^2)^2 instead of the sharp lower cutoff; nm^2.
pub fn dechanneling_xs_screened(q_c: f64, q_screen: f64, q_max: f64, z_eff: f64) -> Result<f64> {
    check_order(q_c, q_screen.min(q_c), q_max)?;
    let za = z_eff * ALPHA * HBAR_C;
    let pref = 4.0 * PI * za * za;
    let quad = Quadrature::new(0.0, 1e-12);
    let g = |q2: f64| 1.0 / ((q2 + q_screen * q_screen).powi(2));
    let soft = quad.integrate(|t| {
        let q2 = t.exp();
        q2 * q2 / (q_c * q_c) * g(q2)
    }, (1e-8 * q_screen * q_screen).ln(), (q_c * q_c).ln())?;
    let hard = quad.integrate(|t| {
        let q2 = t.exp();
        q2 * g(q2)
    }, (q_c * q_c).ln(), (q_max * q_max).ln())?;
    Ok(pref * (soft.value + hard.value))
}

/// Kinematic limit on the transfer to a free electron at rest: the lesser
/// of sqrt(2 m_e T_max) and the 90-degree centre-of-mass transfer, MeV.
pub fn electron_q_max(energy: f64, mass: f64) -> Result<f64> {
    if !(energy > mass && mass >= 0.0) {
        return Err(Error::domain("projectile energy must exceed its mass"));
    }
    let me = ELECTRON_MASS;
    let p2 = energy * energy - mass * mass;
    let s = mass * mass + me * me + 2.0 * energy * me;
    let t_max = 2.0 * me * p2 / s;
    let cm90 = (2.0 * p2).sqrt() * me / s.sqrt();
    Ok((2.0 * me * t_max).sqrt().min(cm90))
}

/// Cutoffs entering the dechanneling estimate for one collision partner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseCutoffs {
    pub z_eff: f64,
    /// Screening range of the thorn, nm.
    pub r_max: f64,
    pub q_min_quantum: f64,
    pub q_min_classical: f64,
    pub q_max_quantum: f64,
    pub q_max_classical: f64,
}

impl CaseCutoffs {
    /// Atom: r_max = u1, Z_eff = Z, upper cutoffs from the nuclear size.
    /// Electron: r_max = a_TF, Z_eff = 1, upper cutoff from kinematics.
    pub fn new(case: DechCase, crystal: &CrystalModel, energy: f64, mass: f64) -> Result<Self> {
        match case {
            DechCase::Atom => {
                let z = crystal.z as f64;
                Ok(Self::from_ranges(z, crystal.u1_nm, HBAR_C / crystal.r_n_nm, z * ALPHA * HBAR_C / crystal.r_n_nm))
            }
            DechCase::Electron => {
                let q = electron_q_max(energy, mass)?;
                Ok(Self::from_ranges(1.0, crystal.a_tf_nm, q, q))
            }
        }
    }

    /// Lower cutoffs hbar c / r_max (quantum) and Z alpha hbar c / r_max (classical).
    pub fn from_ranges(z_eff: f64, r_max: f64, q_max_quantum: f64, q_max_classical: f64) -> Self {
        Self {
            z_eff,
            r_max,
            q_min_quantum: HBAR_C / r_max,
            q_min_classical: z_eff * ALPHA * HBAR_C / r_max,
            q_max_quantum,
            q_max_classical,
        }
    }

    /// Closed-form ratio σ_cl / σ_quant at q_c; independent of the upper cutoffs.
    pub fn ratio(&self, q_c: f64) -> f64 {
        let l_cl = 2.0 * (q_c / self.q_min_classical).ln() + 1.0;
        let l_q = 2.0 * (q_c / self.q_min_quantum).ln() + 1.0;
        l_cl / l_q
    }

    /// q_c at which the closed-form ratio equals `target` (> 1).
    pub fn invert_ratio(&self, target: f64) -> Result<f64> {
        if !(target > 1.0) {
            return Err(Error::domain("target ratio must exceed 1"));
        }
        // 2 (L - l_cl) + 1 = T [2 (L - l_q) + 1] solved for L = ln q_c
        let (l_cl, l_q) = (self.q_min_classical.ln(), self.q_min_quantum.ln());
        let l = (target * (1.0 - 2.0 * l_q) - 1.0 + 2.0 * l_cl) / (2.0 * (1.0 - target));
        let q = l.exp();
        if q < self.q_min_quantum {
            return Err(Error::domain(format!("ratio {target} is not reached above q_min")));
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DechRatio {
    pub case: DechCase,
    pub cutoffs: CaseCutoffs,
    pub quantum: DechannelingEstimate,
    pub classical: DechannelingEstimate,
    /// Ratio of the closed forms.
    pub ratio: f64,
    /// Ratio of the numeric two-integral values.
    pub ratio_numeric: f64,
}

/// Classical-to-quantum dechanneling cross section ratio at q_c.
pub fn dech_ratio(case: DechCase, crystal: &CrystalModel, energy: f64, mass: f64, q_c: f64) -> Result<DechRatio> {
    let cutoffs = CaseCutoffs::new(case, crystal, energy, mass)?;
    dech_ratio_with(case, cutoffs, q_c)
}

pub fn dech_ratio_with(case: DechCase, cutoffs: CaseCutoffs, q_c: f64) -> Result<DechRatio> {
    let quantum = dechanneling_xs(q_c, cutoffs.q_min_quantum, cutoffs.q_max_quantum, cutoffs.z_eff, ScatteringModel::Quantum)?;
    let classical = dechanneling_xs(q_c, cutoffs.q_min_classical, cutoffs.q_max_classical, cutoffs.z_eff, ScatteringModel::Classical)?;
    Ok(DechRatio {
        case,
        cutoffs,
        quantum,
        classical,
        ratio: classical.sigma_closed_form / quantum.sigma_closed_form,
        ratio_numeric: classical.sigma_numeric / quantum.sigma_numeric,
    })
}

/// Closed-form ratio on a list of q_c values.
pub fn ratio_scan(cutoffs: &CaseCutoffs, q_c: &[f64]) -> Vec<(f64, f64)> {
    q_c.iter().map(|&q| (q, cutoffs.ratio(q))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_cutoffs_leave_only_the_hard_term() {
        let e = dechanneling_xs(1.0, 1.0, 1e6, 14.0, ScatteringModel::Quantum).unwrap();
        let za = 14.0 * ALPHA * HBAR_C;
        assert!((e.sigma_closed_form / (4.0 * PI * za * za) - 1.0).abs() < 1e-14);
        assert!((e.sigma_numeric / e.sigma_closed_form - 1.0).abs() < 1e-11);
    }

    #[test]
    fn ordering_violations_are_domain_errors() {
        for (qc, lo, hi) in [(1.0, 2.0, 10.0), (1.0, 0.1, 0.5), (1.0, 0.0, 10.0)] {
            assert!(matches!(dechanneling_xs(qc, lo, hi, 1.0, ScatteringModel::Quantum), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn numeric_matches_closed_form_with_far_upper_cutoff() {
        for &r in &[10.0, 100.0, 1e4] {
            let e = dechanneling_xs(1.0, 1.0 / r, 1e3, 1.0, ScatteringModel::Quantum).unwrap();
            // the closed form drops only the 1/q_max^2 term
            let za = ALPHA * HBAR_C;
            let exact = 4.0 * PI * za * za * ((2.0 * r.ln() + 1.0) - 1e-6);
            assert!((e.sigma_numeric / exact - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn screened_variant_is_close_to_sharp_cutoffs() {
        let sharp = dech_closed_form(1.0, 0.01, 1.0);
        let smooth = dechanneling_xs_screened(1.0, 0.01, 1e3, 1.0).unwrap();
        assert!((smooth / sharp - 1.0).abs() < 0.15);
    }

    #[test]
    fn electron_cap_at_one_gev() {
        let q = electron_q_max(1000.0, ELECTRON_MASS).unwrap();
        // sqrt(2) p m_e / sqrt(s)
        let p = (1000f64.powi(2) - ELECTRON_MASS.powi(2)).sqrt();
        let s = 2.0 * ELECTRON_MASS.powi(2) + 2.0 * 1000.0 * ELECTRON_MASS;
        assert!((q - 2f64.sqrt() * p * ELECTRON_MASS / s.sqrt()).abs() < 1e-12);
        assert!(q > 22.0 && q < 23.0);
    }

    #[test]
    fn ratio_decreases_with_q_c_and_tends_to_one() {
        let c = CaseCutoffs::from_ranges(14.0, 0.0075, 60.0, 6.0);
        let scan = ratio_scan(&c, &[0.1, 0.3, 1.0, 3.0, 10.0]);
        assert!(scan.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(scan.iter().all(|&(_, r)| r > 1.0));
        let unit = CaseCutoffs::from_ranges(1.0 / ALPHA, 0.0075, 60.0, 60.0);
        assert!((unit.ratio(1.0) - 1.0).abs() < 1e-12);
        let q = c.invert_ratio(1.5).unwrap();
        assert!((c.ratio(q) - 1.5).abs() < 1e-12);
    }
}
