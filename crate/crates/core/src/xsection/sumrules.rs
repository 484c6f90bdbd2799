//! Moment sum rules: a thorn exerts no mean transverse force, and the mean
//! squared transfer agrees between the Born and eikonal pictures.

use serde::{Deserialize, Serialize};

use super::born::{atom_table, electron_table};
use super::classical::{classical_dsigma_auto, ImpactGrid, ThornKicker};
use super::formfactor::FormFactorModel;
use super::table::{DifferentialXS, QGrid, ThornDescriptor};
use crate::error::Result;
use crate::model::CrystalModel;
use crate::numerics::quad::log_breaks;
use crate::numerics::{Estimate, Quadrature};
use crate::potentials::{PhenomenologicalThorn, RadialShape, ScreeningModel, ThornVib};
use crate::units::{EV_PER_MEV, HBAR_C};

const PI: f64 = std::f64::consts::PI;

/// Integral of q dσ and of |q| dσ over a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoment {
    /// MeV nm^2.
    pub vector: [f64; 2],
    /// MeV nm^2.
    pub abs: f64,
}

impl FirstMoment {
    /// |integral q dσ| / integral |q| dσ.
    pub fn relative(&self) -> f64 {
        (self.vector[0].hypot(self.vector[1])) / self.abs
    }
}

pub fn sum_rule_first_moment(xs: &DifferentialXS) -> Result<FirstMoment> {
    let (vector, abs) = xs.first_moment()?;
    Ok(FirstMoment { vector, abs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl From<Estimate> for MomentEstimate {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            error: e.error,
            converged: e.error <= 1e-6 * e.value.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub z_eff: f64,
    pub r_max: f64,
    pub r_min: f64,
    /// Integral of q_cl over the impact plane, MeV nm^2.
    pub first_moment: [f64; 2],
    pub first_moment_abs: f64,
    /// Integral of q^2 dσ from the Born cross section, MeV^2 nm^2.
    pub second_moment_quantum: MomentEstimate,
    /// Integral of |q_cl(b)|^2 over the impact plane, MeV^2 nm^2.
    pub second_moment_classical: MomentEstimate,
    /// classical / quantum.
    pub ratio: f64,
}

/// Born second moment from the analytic transform of a spherical shape:
/// (1 / 2 pi) integral k^3 |U(k)|^2 dk with U in MeV nm^3.
pub fn second_moment_quantum(shape: &RadialShape) -> Result<Estimate> {
    let lo = 1e-4 / shape.outer_range();
    let hi = 1e4 / shape.inner_scale();
    let pts: Vec<f64> = log_breaks(lo, hi, 16 * (hi / lo).log10().ceil() as usize)
        .into_iter()
        .map(f64::ln)
        .collect();
    let quad = Quadrature::new(0.0, 1e-11).with_max_intervals(20000);
    let est = quad.integrate_breaks(
        |t| {
            let k = t.exp();
            let u = shape.fourier(k) / EV_PER_MEV;
            k.powi(4) * u * u
        },
        &pts,
    )?;
    Ok(Estimate {
        value: est.value / (2.0 * PI),
        error: est.error / (2.0 * PI),
    })
}

/// Eikonal second moment 2 pi integral b |q_cl(b)|^2 db, with q_cl from the
/// line-integrated kick of the shape.
pub fn second_moment_classical(shape: &RadialShape) -> Result<Estimate> {
    let lo = 1e-4 * shape.inner_scale();
    let hi = shape.outer_range();
    let pts: Vec<f64> = log_breaks(lo, hi, 8 * (hi / lo).log10().ceil() as usize)
        .into_iter()
        .map(f64::ln)
        .collect();
    let quad = Quadrature::new(0.0, 1e-9).with_max_intervals(20000);
    let failure = std::cell::Cell::new(None);
    let est = quad.integrate_breaks(
        |t| {
            let b = t.exp();
            match shape.kick(b) {
                Ok(k) => {
                    let q = k / EV_PER_MEV;
                    b * b * q * q
                }
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        &pts,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate {
        value: 2.0 * PI * est.value,
        error: 2.0 * PI * est.error,
    })
}

/// Closed form of the Born second moment of the phenomenological thorn,
/// 4 pi (Z alpha hbar c)^2 [(A + B)/(B - A) ln(B/A) - 2] with A = 1/r_max^2,
/// B = 1/r_min^2.
pub fn second_moment_closed_form(thorn: &PhenomenologicalThorn) -> f64 {
    let za = thorn.z_eff * crate::units::ALPHA * crate::units::HBAR_C;
    let a = 1.0 / (thorn.r_max * thorn.r_max);
    let b = 1.0 / (thorn.r_min * thorn.r_min);
    4.0 * PI * za * za * ((a + b) / (b - a) * (b / a).ln() - 2.0)
}

pub fn sum_rule_second_moment(thorn: &PhenomenologicalThorn) -> Result<SumRuleReport> {
    let shape = thorn.shape()?;
    let quantum = second_moment_quantum(&shape)?;
    let classical = second_moment_classical(&shape)?;
    let kicker = ThornKicker::new(&thorn.thorn()?, 32)?;
    let impact = ImpactGrid {
        center: [0.0; 2],
        b_min: 1e-3 * thorn.r_min,
        b_max: shape.outer_range(),
        per_decade: 8,
        n_angle: 16,
    };
    let mut first = [0.0; 2];
    let mut first_abs = 0.0;
    for (b, w) in impact.points() {
        let q = kicker.kick(b);
        first[0] += w * q[0];
        first[1] += w * q[1];
        first_abs += w * q[0].hypot(q[1]);
    }
    Ok(SumRuleReport {
        z_eff: thorn.z_eff,
        r_max: thorn.r_max,
        r_min: thorn.r_min,
        first_moment: first,
        first_moment_abs: first_abs,
        second_moment_quantum: quantum.into(),
        second_moment_classical: classical.into(),
        ratio: classical.value / quantum.value,
    })
}

/// First moments of the non-central thorns of a crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMomentReport {
    /// Born table of the atom displaced by u_T = u1 along x.
    pub atom_quantum: FirstMoment,
    /// Born table of an innermost-shell electron at s_T = one orbital radius.
    pub electron_quantum: FirstMoment,
    /// Classical table of the displaced atom.
    pub atom_classical: FirstMoment,
}

impl FirstMomentReport {
    pub fn worst(&self) -> f64 {
        self.atom_quantum
            .relative()
            .max(self.electron_quantum.relative())
            .max(self.atom_classical.relative())
    }
}

pub fn thorn_first_moments(crystal: &CrystalModel, per_decade: usize) -> Result<FirstMomentReport> {
    let z = crystal.z as f64;
    let u1 = crystal.u1_nm;
    let screening = ScreeningModel::moliere(crystal.a_tf_nm, crystal.r_n_nm);
    let ff = FormFactorModel::from_screening(&screening, z);
    let q_lo = 1e-3 * HBAR_C / crystal.a_tf_nm;
    let atom_grid = QGrid::new(q_lo, 12.0 * HBAR_C / u1, per_decade, 32)?;
    let atom_quantum = sum_rule_first_moment(&atom_table(&ff, [u1, 0.0], u1, atom_grid, true)?)?;
    let shell = ff
        .shells
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.orbital.beta.total_cmp(&b.1.orbital.beta))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let orbital = ff.shells[shell].orbital;
    let e_grid = QGrid::new(q_lo, 1e3 * HBAR_C * orbital.beta, per_decade, 32)?;
    let electron_quantum = sum_rule_first_moment(&electron_table(&ff, shell, [orbital.radius(), 0.0], e_grid, true)?)?;
    let vib = ThornVib {
        z,
        screening: screening.clone(),
        u1,
        u: [u1, 0.0, 0.0],
    };
    let kicker = ThornKicker::new(&vib.thorn(), 64)?;
    let impact = ImpactGrid {
        center: [u1, 0.0],
        b_min: 1e-3 * crystal.r_n_nm,
        b_max: 40.0 / screening.mu_min(),
        per_decade: 32,
        n_angle: 64,
    };
    let descriptor = ThornDescriptor::Atom { u_t: [u1, 0.0], u1 };
    let classical = classical_dsigma_auto(&kicker, &impact, 1e-12, per_decade, 32, descriptor)?;
    Ok(FirstMomentReport {
        atom_quantum,
        electron_quantum,
        atom_classical: sum_rule_first_moment(&classical)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn closed_form_integral_oracle() {
        // integral_0^inf t / ((t + A)^2 (t + B)^2) dt against brute force
        let (a, b): (f64, f64) = (2.0, 7.0);
        let d = b - a;
        let closed = (a + b) / d.powi(3) * (b / a).ln() - 2.0 / (d * d);
        let brute = Quadrature::new(0.0, 1e-12)
            .integrate_to_infinity(|t| t / ((t + a).powi(2) * (t + b).powi(2)), 0.0, 3.0)
            .unwrap()
            .value;
        assert!((closed / brute - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quantum_quadrature_matches_closed_form() {
        for &ratio in &[1e-3, 1e-2, 0.1] {
            let t = PhenomenologicalThorn::new(14.0, 0.0075, 0.0075 * ratio).unwrap();
            let q = second_moment_quantum(&t.shape().unwrap()).unwrap();
            assert!((q.value / second_moment_closed_form(&t) - 1.0).abs() < 1e-8, "ratio {ratio}");
        }
    }

    #[test]
    fn unregularised_thorn_diverges() {
        let t = PhenomenologicalThorn::new(14.0, 0.0075, 0.0).unwrap();
        assert!(matches!(sum_rule_second_moment(&t), Err(Error::Divergence(_))));
    }

    #[test]
    fn charge_scaling() {
        let t1 = PhenomenologicalThorn::new(1.0, 0.02, 2e-4).unwrap();
        let t2 = PhenomenologicalThorn::new(2.0, 0.02, 2e-4).unwrap();
        let r1 = sum_rule_second_moment(&t1).unwrap();
        let r2 = sum_rule_second_moment(&t2).unwrap();
        let q = r2.second_moment_quantum.value / r1.second_moment_quantum.value;
        let c = r2.second_moment_classical.value / r1.second_moment_classical.value;
        assert!((q - 4.0).abs() < 1e-9 && (c - 4.0).abs() < 1e-7);
    }

    #[test]
    fn displaced_thorns_have_no_mean_kick() {
        let r = thorn_first_moments(&CrystalModel::si_110(), 16).unwrap();
        assert!(r.worst() < 1e-3, "{r:?}");
        assert!(r.atom_classical.abs > 0.0 && r.electron_quantum.abs > 0.0);
    }

    #[test]
    fn spherical_thorn_has_no_mean_kick() {
        let t = PhenomenologicalThorn::new(14.0, 0.0075, 7.5e-5).unwrap();
        let r = sum_rule_second_moment(&t).unwrap();
        assert!(r.first_moment[0].hypot(r.first_moment[1]) < 1e-12 * r.first_moment_abs);
    }
}
