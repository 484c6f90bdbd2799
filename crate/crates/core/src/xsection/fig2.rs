//! Classical versus Born cross sections of a spherical thorn, both divided
//! by the bare Rutherford form 4 (Z alpha)^2 / q^4.

use serde::{Deserialize, Serialize};

use super::classical::{classical_dsigma, max_central_kick, ImpactGrid, ThornKicker};
use super::table::{QGrid, ThornDescriptor};
use crate::error::Result;
use crate::potentials::PhenomenologicalThorn;
use crate::units::{ALPHA, HBAR_C};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub q_mev: f64,
    pub quantum: f64,
    pub classical: f64,
    pub rutherford: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Data {
    pub thorn: PhenomenologicalThorn,
    /// Largest classical transfer and the impact parameter where it occurs.
    pub max_kick_mev: f64,
    pub b_at_max_nm: f64,
    pub rows: Vec<Fig2Row>,
}

/// Born cross section over Rutherford: [q^2/(q^2+a^2) - q^2/(q^2+b^2)]^2
/// with a = hbar c / r_max and b = hbar c / r_min.
pub fn quantum_over_rutherford(thorn: &PhenomenologicalThorn, q: f64) -> f64 {
    let a = HBAR_C / thorn.r_max;
    let b = HBAR_C / thorn.r_min;
    let q2 = q * q;
    let d = q2 / (q2 + a * a) - q2 / (q2 + b * b);
    d * d
}

/// Tabulate both ratios on a log grid of |q| from `q_min` to `q_max` (MeV).
pub fn fig2_data(thorn: &PhenomenologicalThorn, q_min: f64, q_max: f64, per_decade: usize) -> Result<Fig2Data> {
    let shape = thorn.shape()?;
    let b_lo = 1e-4 * thorn.r_min;
    let b_hi = shape.outer_range();
    let (max_kick, b_star) = max_central_kick(&shape, b_lo, b_hi)?;
    let kicker = ThornKicker::new(&thorn.thorn()?, 128)?;
    let impact = ImpactGrid {
        center: [0.0; 2],
        b_min: b_lo,
        b_max: b_hi,
        per_decade: 4 * per_decade,
        n_angle: 16,
    };
    let grid = QGrid::new(q_min, q_max.max(max_kick * 1.01), per_decade, 4)?;
    let xs = classical_dsigma(&kicker, &impact, grid, ThornDescriptor::Spherical {
        z_eff: thorn.z_eff,
        r_max: thorn.r_max,
        r_min: thorn.r_min,
    })?;
    let za = thorn.z_eff * ALPHA * HBAR_C;
    let edges = xs.q_edges();
    let rows = xs
        .row_density()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let q = (edges[i] * edges[i + 1]).sqrt();
            let ruth = 4.0 * za * za / q.powi(4);
            Fig2Row {
                q_mev: q,
                quantum: quantum_over_rutherford(thorn, q),
                classical: d / ruth,
                rutherford: 1.0,
            }
        })
        .collect();
    Ok(Fig2Data {
        thorn: *thorn,
        max_kick_mev: max_kick,
        b_at_max_nm: b_star,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_of_the_two_curves() {
        let t = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6).unwrap();
        let data = fig2_data(&t, 1e-3, 100.0, 64).unwrap();
        let last = data.rows.iter().rposition(|r| r.classical > 0.0).unwrap();
        // nothing beyond the largest kick
        assert!(data.rows[last].q_mev <= data.max_kick_mev * 1.02);
        assert!(data.rows[last + 1..].iter().all(|r| r.classical == 0.0));
        // pile-up below the endpoint exceeds the Coulomb baseline
        let peak = data.rows[..=last]
            .iter()
            .filter(|r| r.q_mev > data.max_kick_mev / 10.0)
            .map(|r| r.classical)
            .fold(0.0, f64::max);
        assert!(peak > 1.0);
        // Born and classical agree with Rutherford between the scales
        for r in &data.rows {
            if r.q_mev > 10.0 * HBAR_C / t.r_max && r.q_mev < 0.05 * HBAR_C / t.r_min {
                assert!((r.quantum - 1.0).abs() < 0.05, "q={}", r.q_mev);
            }
            if r.q_mev > 10.0 * HBAR_C / t.r_max && r.q_mev < 0.05 * data.max_kick_mev {
                assert!((r.classical - 1.0).abs() < 0.05, "q={} cl={}", r.q_mev, r.classical);
            }
        }
    }
}
