//! Special functions. Bessel and incomplete-gamma functions come from the
//! Cephes library; the error functions from `puruspe`.

use special_fun::unsafe_cephes_double as cephes;

#[inline]
pub fn bessel_j0(x: f64) -> f64 {
    // SAFETY: pure numeric routine without side effects
    unsafe { cephes::j0(x) }
}

#[inline]
pub fn bessel_k0(x: f64) -> f64 {
    if x > 700.0 {
        0.0
    } else {
        unsafe { cephes::k0(x) }
    }
}

#[inline]
pub fn bessel_k1(x: f64) -> f64 {
    if x > 700.0 {
        0.0
    } else {
        unsafe { cephes::k1(x) }
    }
}

/// `exp(-x) I0(x)`, finite for all x >= 0.
#[inline]
pub fn bessel_i0_scaled(x: f64) -> f64 {
    unsafe { cephes::i0e(x.abs()) }
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    puruspe::erfc(x)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
#[inline]
pub fn erfcx(x: f64) -> f64 {
    puruspe::erfcx(x)
}

/// Regularized lower incomplete gamma function P(a, x).
#[inline]
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        unsafe { cephes::igam(a, x) }
    }
}

/// Regularized upper incomplete gamma function Q(a, x).
#[inline]
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        unsafe { cephes::igamc(a, x) }
    }
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    unsafe { cephes::lgam(x) }
}

/// Upper-tail probability of a chi-square variate with `dof` degrees of freedom.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    gamma_q(0.5 * dof, 0.5 * stat)
}
