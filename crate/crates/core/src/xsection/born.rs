//! First Born approximation cross sections of thorns.
//!
//! Differential cross sections are returned per unit transverse momentum
//! transfer, nm^2 / MeV^2; totals are in nm^2. Internally the transfer is
//! carried as a wave number k = q / hbar c in nm^-1.

use num_complex::Complex64;

use super::formfactor::FormFactorModel;
use super::table::{DifferentialXS, QGrid, ThornDescriptor};
use crate::error::{Error, Result};
use crate::numerics::special::bessel_j0;
use crate::numerics::quad::log_breaks;
use crate::numerics::Quadrature;
use crate::potentials::{OrbitalModel, Thorn};
use crate::units::{ALPHA, EV_PER_MEV, HBAR_C};

const PI: f64 = std::f64::consts::PI;

/// Which transform feeds the generic Born formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierRoute {
    /// Analytic transforms of the charge densities divided by k^2.
    Charge,
    /// Radial quadrature of the potentials themselves.
    Potential,
}

/// Converts |U(q)|^2 with U in eV nm^3 into d sigma / d^2 q.
fn amplitude_to_dsigma(amp: Complex64) -> f64 {
    let a = amp.norm() / EV_PER_MEV;
    a * a / (4.0 * PI * PI * HBAR_C.powi(4))
}

/// Born cross section of an arbitrary thorn at momentum transfer q (MeV):
/// |U(q)|^2 / (4 pi^2) with U the Fourier transform of the potential energy.
pub fn born_dsigma_generic(thorn: &Thorn, q: [f64; 3], route: FourierRoute) -> Result<f64> {
    let amp = match route {
        FourierRoute::Charge => thorn.fourier(q)?,
        FourierRoute::Potential => thorn.fourier_numeric(q)?,
    };
    Ok(amplitude_to_dsigma(amp))
}

#[inline]
fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// 1 + w^2 - 2 w cos(phase) written without cancellation.
#[inline]
fn interference(w: f64, one_minus_w: f64, phase: f64) -> f64 {
    let s = (0.5 * phase).sin();
    one_minus_w * one_minus_w + 4.0 * w * s * s
}

/// Atom thorn with transverse displacement `u_t` (nm):
/// 4 [Z alpha f_A / q^2]^2 |exp(i q.u) - exp(-q^2 u1^2 / 2)|^2.
pub fn born_dsigma_atom(q_t: [f64; 2], u_t: [f64; 2], ff: &FormFactorModel, u1: f64) -> f64 {
    let kv = [q_t[0] / HBAR_C, q_t[1] / HBAR_C];
    let k = norm2(kv);
    if k == 0.0 {
        return 0.0;
    }
    let x = 0.5 * k * k * u1 * u1;
    let dw = (-x).exp();
    let one_minus_dw = -(-x).exp_m1();
    let phase = kv[0] * u_t[0] + kv[1] * u_t[1];
    let f_over_k2 = ff.atom(k) / (k * k);
    let za = ff.z * ALPHA;
    4.0 * za * za * f_over_k2 * f_over_k2 * interference(dw, one_minus_dw, phase) / (HBAR_C * HBAR_C)
}

/// Electron thorn of orbital `shell` with the electron at transverse offset
/// `s_t` (nm): 4 (alpha / q^2)^2 |exp(-i q.s) - f_k(q)|^2. At q = 0 the
/// result is finite only for s = 0.
pub fn born_dsigma_electron(q_t: [f64; 2], s_t: [f64; 2], ff: &FormFactorModel, shell: usize) -> f64 {
    electron_dsigma(q_t, s_t, &ff.shells[shell].orbital)
}

pub(crate) fn electron_dsigma(q_t: [f64; 2], s_t: [f64; 2], orbital: &OrbitalModel) -> f64 {
    let kv = [q_t[0] / HBAR_C, q_t[1] / HBAR_C];
    let k = norm2(kv);
    let pref = 4.0 * ALPHA * ALPHA / (HBAR_C * HBAR_C);
    if k == 0.0 {
        if norm2(s_t) > 0.0 {
            return f64::INFINITY;
        }
        let m = orbital.mean_square_radius() / 6.0;
        return pref * m * m;
    }
    let f = orbital.form_factor(k);
    let one_minus_f = one_minus_form_factor(orbital, k);
    let phase = kv[0] * s_t[0] + kv[1] * s_t[1];
    let a = interference(f, one_minus_f, phase) / (k * k);
    pref * a / (k * k)
}

/// 1 - f(k), accurate when f is close to one.
pub(crate) fn one_minus_form_factor(orbital: &OrbitalModel, k: f64) -> f64 {
    let x2 = k * k * orbital.mean_square_radius();
    if x2 < 1e-6 {
        // series of the family's form factor to second order
        let p = orbital.power;
        let b2 = orbital.beta * orbital.beta;
        let r4 = (p + 3.0) * (p + 4.0) * (p + 5.0) * (p + 6.0) / (b2 * b2);
        x2 / 6.0 - k.powi(4) * r4 / 120.0
    } else {
        1.0 - orbital.form_factor(k)
    }
}

/// Momentum-space window for total cross sections, as wave numbers (nm^-1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KWindow {
    pub lo: f64,
    /// `f64::INFINITY` integrates the Rutherford tail analytically.
    pub hi: f64,
}

impl KWindow {
    pub fn full() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn from_mev(q_lo: f64, q_hi: f64) -> Self {
        Self {
            lo: q_lo / HBAR_C,
            hi: q_hi / HBAR_C,
        }
    }
}

/// 2 pi integral k dk g(k) over a window, done in ln k with breaks that
/// follow the oscillation of J0 where it matters.
fn integrate_k<F: Fn(f64) -> f64>(
    g_k2: F,
    window: KWindow,
    scale_lo: f64,
    k_top: f64,
    osc_period: Option<(f64, f64)>,
    tail_coeff: f64,
) -> Result<f64> {
    let lo = if window.lo > 0.0 { window.lo } else { 1e-6 * scale_lo };
    let hi = window.hi.min(k_top);
    if hi <= lo {
        return Ok(0.0);
    }
    let decades = (hi / lo).log10().max(1.0);
    let mut pts: Vec<f64> = log_breaks(lo, hi, (8.0 * decades).ceil() as usize)
        .into_iter()
        .map(f64::ln)
        .collect();
    if let Some((period, until)) = osc_period {
        let mut k = period;
        let stop = until.min(hi);
        let mut n = 0;
        while k < stop && n < 4000 {
            if k > lo {
                pts.push(k.ln());
            }
            k += period;
            n += 1;
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let quad = Quadrature::new(0.0, 1e-10).with_max_intervals(20000);
    let est = quad.integrate_breaks(
        |t| {
            let k = t.exp();
            2.0 * PI * g_k2(k)
        },
        &pts,
    )?;
    let mut total = est.value;
    if window.hi > k_top {
        // Rutherford tail beyond k_top: g -> tail_coeff / k^4
        let upper = if window.hi.is_finite() { 1.0 / (window.hi * window.hi) } else { 0.0 };
        total += PI * tail_coeff * (1.0 / (k_top * k_top) - upper);
    }
    Ok(total)
}

/// Total Born cross section (nm^2) of the atom thorn for displacement
/// |u_T| over the full momentum range.
pub fn sigma_atom_total(abs_u_t: f64, ff: &FormFactorModel, u1: f64) -> Result<f64> {
    sigma_atom_window(abs_u_t, ff, u1, KWindow::full())
}

/// Same, restricted to a window of transfers.
pub fn sigma_atom_window(abs_u_t: f64, ff: &FormFactorModel, u1: f64, window: KWindow) -> Result<f64> {
    if !(abs_u_t >= 0.0) {
        return Err(Error::domain("|u_T| must be non-negative"));
    }
    let za = ff.z * ALPHA;
    let coeff = 4.0 * za * za;
    let g = |k: f64| {
        let x = 0.5 * k * k * u1 * u1;
        let dw = (-x).exp();
        let omd = -(-x).exp_m1();
        let f = ff.atom(k) / k;
        // azimuthal average of |exp(i q.u) - dw|^2
        let a = omd * omd + 2.0 * dw * (1.0 - bessel_j0(k * abs_u_t));
        coeff * f * f * a / (k * k) * k * k
    };
    let k_top = (60.0 * ff.max_beta()).max(60.0 / u1.max(1e-300)).max(1e4 * ff.min_beta());
    let osc = if abs_u_t > 0.0 { Some((PI / abs_u_t, 12.0 / u1)) } else { None };
    integrate_k(|k| g(k) / (k * k) * k * k, window, ff.min_beta(), k_top, osc, coeff)
}

/// Total Born cross section (nm^2) of an electron thorn with |s_T| over a
/// window of transfers. A displaced electron has a dipole field, so the
/// window must have a positive lower edge when |s_T| > 0.
pub fn sigma_electron_window(abs_s_t: f64, orbital: &OrbitalModel, window: KWindow) -> Result<f64> {
    if !(abs_s_t >= 0.0) {
        return Err(Error::domain("|s_T| must be non-negative"));
    }
    if abs_s_t > 0.0 && window.lo <= 0.0 {
        return Err(Error::Divergence(
            "dipole cross section of a displaced electron needs an infrared cutoff".into(),
        ));
    }
    let coeff = 4.0 * ALPHA * ALPHA;
    let g = |k: f64| {
        let f = orbital.form_factor(k);
        let omf = one_minus_form_factor(orbital, k);
        let x = k * abs_s_t;
        let one_minus_j0 = if x < 1e-3 { x * x / 4.0 - x.powi(4) / 64.0 } else { 1.0 - bessel_j0(x) };
        coeff * (omf * omf + 2.0 * f * one_minus_j0) / (k * k)
    };
    let k_top = 1e4 * orbital.beta;
    let osc = if abs_s_t > 0.0 { Some((PI / abs_s_t, 60.0 * orbital.beta)) } else { None };
    integrate_k(g, window, orbital.beta, k_top, osc, coeff)
}

/// Tabulate the atom-thorn cross section for displacement `u_t`. The
/// table frame has u_T along +x; rotate draws by the angle of u_T.
pub fn atom_table(ff: &FormFactorModel, u_t: [f64; 2], u1: f64, grid: QGrid, with_moments: bool) -> Result<DifferentialXS> {
    let u = norm2(u_t);
    DifferentialXS::from_density(
        grid,
        ThornDescriptor::Atom { u_t, u1 },
        |q, phi| born_dsigma_atom([q * phi.cos(), q * phi.sin()], [u, 0.0], ff, u1),
        |q| {
            let k = q / HBAR_C;
            // the interference term only shapes the azimuth while exp(-q^2 u1^2 / 2) is sizeable
            if 0.5 * k * k * u1 * u1 < 7.0 {
                k * u
            } else {
                0.0
            }
        },
        with_moments,
    )
}

/// Tabulate the electron-thorn cross section of one shell for offset `s_t`,
/// in the frame where s_T lies along +x.
pub fn electron_table(ff: &FormFactorModel, shell: usize, s_t: [f64; 2], grid: QGrid, with_moments: bool) -> Result<DifferentialXS> {
    electron_table_smoothed(ff, shell, s_t, grid, f64::INFINITY, with_moments)
}

/// As [`electron_table`], but where the interference phase k |s_T| exceeds
/// `max_phase` the fringe cos(q.s) is replaced by its azimuthal mean
/// J0(k |s_T|). The fringes there are finer than any azimuth bin.
pub fn electron_table_smoothed(
    ff: &FormFactorModel,
    shell: usize,
    s_t: [f64; 2],
    grid: QGrid,
    max_phase: f64,
    with_moments: bool,
) -> Result<DifferentialXS> {
    let orbital = ff.shells[shell].orbital;
    let s = norm2(s_t);
    let pref = 4.0 * ALPHA * ALPHA / (HBAR_C * HBAR_C);
    DifferentialXS::from_density(
        grid,
        ThornDescriptor::Electron { s_t, shell },
        |q, phi| {
            let k = q / HBAR_C;
            if k * s <= max_phase {
                return electron_dsigma([q * phi.cos(), q * phi.sin()], [s, 0.0], &orbital);
            }
            let f = orbital.form_factor(k);
            let omf = one_minus_form_factor(&orbital, k);
            pref * (omf * omf + 2.0 * f * (1.0 - bessel_j0(k * s))) / (k * k * k * k)
        },
        |q| {
            let k = q / HBAR_C;
            if k * s <= max_phase && orbital.form_factor(k) > 1e-3 {
                k * s
            } else {
                0.0
            }
        },
        with_moments,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{ScreeningModel, ThornElectron, ThornVib};

    const U1: f64 = 0.0075;

    fn model() -> (ScreeningModel, FormFactorModel) {
        let s = ScreeningModel::moliere(0.0194, 0.0);
        let ff = FormFactorModel::from_screening(&s, 14.0);
        (s, ff)
    }

    #[test]
    fn generic_routes_agree() {
        let (s, _) = model();
        let vib = ThornVib { z: 14.0, screening: s, u1: U1, u: [0.004, -0.002, 0.001] }.thorn();
        for &q in &[2e-4, 3e-3, 0.05] {
            let qv = [q * 0.6, q * 0.8, 0.0];
            let a = born_dsigma_generic(&vib, qv, FourierRoute::Charge).unwrap();
            let b = born_dsigma_generic(&vib, qv, FourierRoute::Potential).unwrap();
            assert!((a / b - 1.0).abs() < 1e-8, "q={q}: {a} vs {b}");
        }
    }

    #[test]
    fn generic_matches_closed_form_for_atom() {
        let (s, ff) = model();
        let u = [0.006, 0.003];
        let vib = ThornVib { z: 14.0, screening: s, u1: U1, u: [u[0], u[1], 0.0] }.thorn();
        for i in 0..12 {
            let k = (0.01 / U1) * 1000f64.powf(i as f64 / 11.0);
            let q = k * HBAR_C;
            let qt = [q * 0.28, q * (1.0f64 - 0.28 * 0.28).sqrt()];
            let g = born_dsigma_generic(&vib, [qt[0], qt[1], 0.0], FourierRoute::Potential).unwrap();
            let c = born_dsigma_atom(qt, u, &ff, U1);
            assert!((g / c - 1.0).abs() < 1e-6, "k={k}: {g} vs {c}");
        }
    }

    #[test]
    fn charge_scaling_quadruples() {
        let (s, _) = model();
        let t = ThornVib { z: 14.0, screening: s, u1: U1, u: [0.003, 0.0, 0.0] }.thorn();
        let q = [0.01, 0.004, 0.0];
        let a = born_dsigma_generic(&t, q, FourierRoute::Charge).unwrap();
        let b = born_dsigma_generic(&t.scaled(2.0), q, FourierRoute::Charge).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn charged_thorn_diverges_at_zero() {
        let t = Thorn::single(crate::potentials::RadialShape::PointCharge { charge: 1.0, r_reg: 1e-6 });
        assert!(matches!(
            born_dsigma_generic(&t, [0.0; 3], FourierRoute::Charge),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn atom_thorn_vanishes_without_displacement_or_smearing() {
        let (_, ff) = model();
        assert_eq!(born_dsigma_atom([0.01, 0.02], [0.0, 0.0], &ff, 0.0), 0.0);
    }

    #[test]
    fn atom_azimuthal_average_matches_bessel_form() {
        let (_, ff) = model();
        let u = 0.009;
        for &q in &[5e-3, 0.03, 0.2] {
            let n = 4000;
            let avg: f64 = (0..n)
                .map(|i| {
                    let phi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                    born_dsigma_atom([q * phi.cos(), q * phi.sin()], [u, 0.0], &ff, U1)
                })
                .sum::<f64>()
                / n as f64;
            let k = q / HBAR_C;
            let dw = (-0.5 * k * k * U1 * U1).exp();
            let za = 14.0 * ALPHA;
            let f = ff.atom(k);
            let oracle = 4.0 * (za * f / (k * k)).powi(2) * (1.0 + dw * dw - 2.0 * dw * bessel_j0(k * u))
                / (HBAR_C * HBAR_C);
            assert!((avg / oracle - 1.0).abs() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn atom_approaches_rutherford() {
        let (_, ff) = model();
        let q = 5.0;
        let k = q / HBAR_C;
        let ruth = 4.0 * (14.0 * ALPHA / (k * k)).powi(2) / (HBAR_C * HBAR_C);
        let r = born_dsigma_atom([q, 0.0], [0.002, 0.0], &ff, U1) / ruth;
        assert!((r - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sigma_atom_monotone_and_limits() {
        let (_, ff) = model();
        let mut prev = 0.0;
        for i in 0..=20 {
            let u = 5.0 * U1 * i as f64 / 20.0;
            let s = sigma_atom_total(u, &ff, U1).unwrap();
            assert!(s >= prev * (1.0 - 1e-9), "u={u}");
            prev = s;
        }
        let s0 = sigma_atom_total(0.0, &ff, U1).unwrap();
        let s1 = sigma_atom_total(U1, &ff, U1).unwrap();
        assert!(s1 > s0 && s0 > 0.0);
        // far displacement: atom and smeared atom scatter incoherently
        let atom = sigma_atom_total(0.0, &ff, 0.0).unwrap_or(0.0);
        let _ = atom;
        let far = sigma_atom_total(2.0, &ff, U1).unwrap();
        let za = 14.0 * ALPHA;
        let sep = integrate_k(
            |k| {
                let f = ff.atom(k) / k;
                let dw = (-0.5 * k * k * U1 * U1).exp();
                4.0 * za * za * f * f * (1.0 + dw * dw)
            },
            KWindow::full(),
            ff.min_beta(),
            1e6,
            None,
            4.0 * za * za,
        )
        .unwrap();
        assert!((far / sep - 1.0).abs() < 2e-3, "{far} vs {sep}");
    }

    #[test]
    fn electron_dipole_suppression_and_rutherford_limit() {
        let (_, ff) = model();
        let o = ff.shells[2].orbital;
        let small = born_dsigma_electron([1e-9, 0.0], [0.0, 0.0], &ff, 2);
        let zero = born_dsigma_electron([0.0, 0.0], [0.0, 0.0], &ff, 2);
        assert!(small.is_finite() && (small / zero - 1.0).abs() < 1e-6);
        let m = o.mean_square_radius() / 6.0;
        let oracle = 4.0 * ALPHA * ALPHA * m * m / (HBAR_C * HBAR_C);
        assert!((zero / oracle - 1.0).abs() < 1e-12);
        let q = 40.0;
        let k = q / HBAR_C;
        let ruth = 4.0 * ALPHA * ALPHA / k.powi(4) / (HBAR_C * HBAR_C);
        let r = born_dsigma_electron([0.0, q], [0.01, 0.0], &ff, 2) / ruth;
        assert!((r - 1.0).abs() < 1e-3);
    }

    #[test]
    fn electron_total_depends_on_offset_magnitude_only() {
        let (_, ff) = model();
        let o = ff.shells[1].orbital;
        let w = KWindow::from_mev(HBAR_C / 0.543, 20.0);
        let s = 0.01;
        let total = sigma_electron_window(s, &o, w).unwrap();
        // brute-force 2-D integration for two orientations of s_T
        for &ang in &[0.0f64, 1.1] {
            let st = [s * ang.cos(), s * ang.sin()];
            let n_phi = 256;
            let quad = Quadrature::new(0.0, 1e-9).with_max_intervals(4000);
            let lo = w.lo * HBAR_C;
            let hi = w.hi * HBAR_C;
            let v = quad
                .integrate(
                    |t| {
                        let q = t.exp();
                        let mut acc = 0.0;
                        for i in 0..n_phi {
                            let phi = 2.0 * PI * (i as f64 + 0.5) / n_phi as f64;
                            acc += electron_dsigma([q * phi.cos(), q * phi.sin()], st, &o);
                        }
                        acc * 2.0 * PI / n_phi as f64 * q * q
                    },
                    lo.ln(),
                    hi.ln(),
                )
                .unwrap()
                .value;
            assert!((v / total - 1.0).abs() < 1e-5, "angle {ang}: {v} vs {total}");
        }
        assert!(sigma_electron_window(s, &o, KWindow::full()).is_err());
        let _ = ThornElectron::new(o, [0.0; 3], [0.0; 3]);
    }
}
