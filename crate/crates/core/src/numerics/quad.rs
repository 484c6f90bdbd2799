//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Four-point Gauss–Legendre rule on [-1, 1], used for fixed bin integrals.
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut lo = [0.0; 7];
    let mut hi = [0.0; 7];
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        lo[j] = f(c - x);
        hi[j] = f(c + x);
        kron += WGK[j] * (lo[j] + hi[j]);
        abs_sum += WGK[j] * (lo[j].abs() + hi[j].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo[j] + hi[j]);
        }
    }
    let value = kron * h;
    let mut err = ((kron - gauss) * h).abs();
    // QUADPACK-style error rescaling
    let mean = 0.5 * kron;
    let mut asc = (fc - mean).abs() * WGK[7];
    for j in 0..7 {
        asc += WGK[j] * ((lo[j] - mean).abs() + (hi[j] - mean).abs());
    }
    asc *= h.abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (1.0f64).min((200.0 * err / asc).powf(1.5));
    }
    let res_abs = abs_sum * h.abs();
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err, res_abs)
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrate over consecutive panels `[p0, p1], [p1, p2], ...`; use the
    /// break points to tell the integrator about kinks and peaks.
    pub fn integrate_breaks<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        assert!(points.len() >= 2);
        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        let mut total_abs = 0.0;
        for w in points.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let (v, e, m) = gk15(&f, w[0], w[1]);
            total += v;
            total_err += e;
            total_abs += m;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
                abs: m,
            });
        }
        let lo = points[0];
        let hi = points[points.len() - 1];
        loop {
            // accept once the error is down to the rounding floor of the panel sums
            let tol = self
                .abs_tol
                .max(self.rel_tol * total.abs())
                .max(200.0 * f64::EPSILON * total_abs);
            if total_err <= tol {
                return Ok(Estimate {
                    value: total,
                    error: total_err,
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    a: lo,
                    b: hi,
                    value: total,
                    error: total_err,
                    intervals: heap.len(),
                });
            }
            let worst = match heap.pop() {
                Some(s) => s,
                None => {
                    return Ok(Estimate {
                        value: total,
                        error: total_err,
                    })
                }
            };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval exhausted at machine precision; accept what we have
                return Ok(Estimate {
                    value: total,
                    error: total_err,
                });
            }
            let (v1, e1, m1) = gk15(&f, worst.a, mid);
            let (v2, e2, m2) = gk15(&f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            total_abs += m1 + m2 - worst.abs;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
                abs: m1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
                abs: m2,
            });
        }
    }

    /// Integrate over `[a, inf)` with the map `x = a + scale * t / (1 - t)`.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64, scale: f64) -> Result<Estimate> {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            let v = f(x) * scale / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}

/// Log-spaced break points from `a` to `b` (both > 0), `n` panels.
pub fn log_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let la = a.ln();
    let lb = b.ln();
    (0..=n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == n {
                b
            } else {
                (la + (lb - la) * i as f64 / n as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_integrand() {
        let q = Quadrature::new(0.0, 1e-12);
        let r = q.integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value / exact - 1.0).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite() {
        let q = Quadrature::new(0.0, 1e-12);
        let r = q.integrate_to_infinity(|x| (-x).exp(), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let q = Quadrature::new(0.0, 1e-14).with_max_intervals(4);
        let r = q.integrate(|x| (1.0 / x).sin(), 1e-6, 1.0);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
