//! Unit system: energies and momenta in MeV, lengths in nm, potentials
//! reported in eV. `HBAR_C` converts between inverse length and momentum.

/// Fine-structure constant (CODATA 2018).
pub const ALPHA: f64 = 7.297_352_569_3e-3;
/// Electron rest mass, MeV.
pub const ELECTRON_MASS: f64 = 0.510_998_950_00;
/// hbar * c in MeV nm.
pub const HBAR_C: f64 = 1.973_269_804e-4;
/// eV per MeV.
pub const EV_PER_MEV: f64 = 1.0e6;
/// alpha * hbar * c in eV nm: Coulomb energy of two unit charges at 1 nm.
pub const COULOMB_EV_NM: f64 = ALPHA * HBAR_C * EV_PER_MEV;
/// nm per micrometre.
pub const NM_PER_UM: f64 = 1.0e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub fine_structure_alpha: f64,
    pub electron_mass: f64,
    pub hbar_c: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            fine_structure_alpha: ALPHA,
            electron_mass: ELECTRON_MASS,
            hbar_c: HBAR_C,
        }
    }
}

/// Momentum (MeV) to wave number (nm^-1).
#[inline]
pub fn momentum_to_wavenumber(q_mev: f64) -> f64 {
    q_mev / HBAR_C
}

/// Wave number (nm^-1) to momentum (MeV).
#[inline]
pub fn wavenumber_to_momentum(k_inv_nm: f64) -> f64 {
    k_inv_nm * HBAR_C
}

#[inline]
pub fn mev_to_ev(v: f64) -> f64 {
    v * EV_PER_MEV
}

#[inline]
pub fn ev_to_mev(v: f64) -> f64 {
    v / EV_PER_MEV
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants_match_reference_values() {
        let c = PhysicalConstants::default();
        assert!((c.fine_structure_alpha * 137.035_999 - 1.0).abs() < 1e-5);
        // 197.327 MeV fm
        assert!((c.hbar_c * 1.0e6 / 197.327 - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn wavenumber_round_trip(q in 1e-6f64..1e3) {
            let back = wavenumber_to_momentum(momentum_to_wavenumber(q));
            prop_assert!((back / q - 1.0).abs() < 1e-12);
        }
    }
}
