//! Atomic and orbital form factors. The atomic one is defined from the
//! orbitals so that f_A = 1 - sum_k n_k f_k / Z holds identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{OrbitalModel, ScreeningModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub orbital: OrbitalModel,
    /// Number of electrons in the shell; need not be an integer.
    pub occupation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormFactorModel {
    pub z: f64,
    pub shells: Vec<Shell>,
}

impl FormFactorModel {
    pub fn new(z: f64, shells: Vec<Shell>) -> Result<Self> {
        if !(z >= 1.0) {
            return Err(Error::domain(format!("atomic number must be >= 1, got {z}")));
        }
        let n: f64 = shells.iter().map(|s| s.occupation).sum();
        if (n - z).abs() > 1e-9 * z {
            return Err(Error::domain(format!(
                "shell occupations sum to {n}, expected a neutral atom with {z} electrons"
            )));
        }
        if shells.iter().any(|s| !(s.occupation > 0.0)) {
            return Err(Error::domain("shell occupations must be positive"));
        }
        Ok(Self { z, shells })
    }

    /// One Yukawa-density shell per screening term, holding Z w_i electrons.
    /// The resulting f_A reproduces the screened potential exactly.
    pub fn from_screening(screening: &ScreeningModel, z: f64) -> Self {
        let shells = screening
            .terms
            .iter()
            .map(|t| Shell {
                orbital: OrbitalModel::yukawa_shell(t.mu),
                occupation: z * t.weight,
            })
            .collect();
        Self { z, shells }
    }

    /// f_k at wave number k (nm^-1).
    pub fn orbital(&self, index: usize, k: f64) -> f64 {
        self.shells[index].orbital.form_factor(k)
    }

    /// Charge form factor of the atom at wave number k (nm^-1).
    pub fn atom(&self, k: f64) -> f64 {
        let electrons: f64 = self
            .shells
            .iter()
            .map(|s| s.occupation * s.orbital.form_factor(k))
            .sum();
        1.0 - electrons / self.z
    }

    /// Largest inverse orbital size, a wave number above which f_A is near 1.
    pub fn max_beta(&self) -> f64 {
        self.shells.iter().map(|s| s.orbital.beta).fold(0.0, f64::max)
    }

    pub fn min_beta(&self) -> f64 {
        self.shells
            .iter()
            .map(|s| s.orbital.beta)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::COULOMB_EV_NM;

    fn si() -> (ScreeningModel, FormFactorModel) {
        let s = ScreeningModel::moliere(0.0194, 0.0);
        let ff = FormFactorModel::from_screening(&s, 14.0);
        (s, ff)
    }

    #[test]
    fn limits() {
        let (_, ff) = si();
        assert!(ff.atom(0.0).abs() < 1e-12);
        assert!((ff.atom(1e8) - 1.0).abs() < 1e-6);
        for i in 0..ff.shells.len() {
            assert!((ff.orbital(i, 0.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_holds_on_a_grid() {
        let (_, ff) = si();
        for i in 0..200 {
            let k = 10f64.powf(-2.0 + 8.0 * i as f64 / 199.0);
            let sum: f64 = (0..3).map(|j| ff.shells[j].occupation * ff.orbital(j, k)).sum();
            assert!((ff.atom(k) - (1.0 - sum / 14.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn consistent_with_screened_potential() {
        let (s, ff) = si();
        for &k in &[1.0, 30.0, 300.0, 3000.0] {
            let from_ff = 4.0 * std::f64::consts::PI * 14.0 * COULOMB_EV_NM * ff.atom(k) / (k * k);
            assert!((from_ff / s.fourier(k, 14.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_charged_atom() {
        let shells = vec![Shell { orbital: OrbitalModel::yukawa_shell(10.0), occupation: 3.0 }];
        assert!(FormFactorModel::new(4.0, shells).is_err());
    }
}
