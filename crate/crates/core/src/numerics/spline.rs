//! Cubic interpolating splines. Values and first derivatives come from the
//! same piecewise polynomial, so a force taken from `derivative` is exactly
//! the gradient of the potential taken from `eval`.

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    uniform: Option<(f64, f64)>,
}

impl CubicSpline {
    /// Natural cubic spline through `(x[i], y[i])`; `x` strictly increasing.
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 3 && y.len() == n, "spline needs at least three nodes");
        let mut m = vec![0.0; n];
        // Thomas algorithm on the interior second derivatives
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        let h = (x[n - 1] - x[0]) / (n - 1) as f64;
        let is_uniform = x
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
        let uniform = is_uniform.then_some((x[0], h));
        Self { x, y, m, uniform }
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn max_abs_second_derivative(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        if let Some((x0, h)) = self.uniform {
            let i = ((t - x0) / h).floor();
            return (i.max(0.0) as usize).min(n - 2);
        }
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value; linear extrapolation is not attempted, the end polynomials are used.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    /// Value and derivative in one pass.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0;
        (v, d)
    }
}

/// Periodic cubic spline on a uniform grid `x_i = i * period / n`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    period: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(period: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 4, "periodic spline needs at least four nodes");
        let h = period / n as f64;
        // (M[i-1] + 4 M[i] + M[i+1]) / 6 = second difference / h^2
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let ym = y[(i + n - 1) % n];
                let yp = y[(i + 1) % n];
                (yp - 2.0 * y[i] + ym) / (h * h)
            })
            .collect();
        let m = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Self { period, h, y, m }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn node_values(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    fn split(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let t = x.rem_euclid(self.period) / self.h;
        let i = (t.floor() as usize).min(n - 1);
        (i, t - i as f64)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    #[inline]
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.y.len();
        let (i, b) = self.split(x);
        let j = (i + 1) % n;
        let a = 1.0 - b;
        let h = self.h;
        let v = a * self.y[i]
            + b * self.y[j]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[j]) * h * h / 6.0;
        let d = (self.y[j] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[j]) * h / 6.0;
        (v, d)
    }

    /// Second derivative (piecewise linear).
    pub fn second_derivative(&self, x: f64) -> f64 {
        let n = self.y.len();
        let (i, b) = self.split(x);
        let j = (i + 1) % n;
        (1.0 - b) * self.m[i] + b * self.m[j]
    }

    pub fn max_abs_second_derivative(&self) -> f64 {
        self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Solve the cyclic tridiagonal system with constant bands (a, b, c) times 1/6.
fn solve_cyclic(a: f64, b: f64, c: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let (a, b, c) = (a / 6.0, b / 6.0, c / 6.0);
    // Sherman–Morrison on top of the Thomas algorithm
    let gamma = -b;
    let mut diag = vec![b; n];
    diag[0] = b - gamma;
    diag[n - 1] = b - a * c / gamma;
    let thomas = |d: &[f64]| -> Vec<f64> {
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c / diag[0];
        dp[0] = d[0] / diag[0];
        for i in 1..n {
            let denom = diag[i] - a * cp[i - 1];
            cp[i] = c / denom;
            dp[i] = (d[i] - a * dp[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = a;
    let z = thomas(&u);
    let fact = (x[0] + c * x[n - 1] / gamma) / (1.0 + z[0] + c * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn natural_spline_reproduces_smooth_function() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::natural(x, y);
        for k in 10..180 {
            let t = k as f64 * 0.05 + 0.013;
            assert!((s.eval(t) - t.sin()).abs() < 1e-6);
            assert!((s.derivative(t) - t.cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn periodic_spline_matches_cosine() {
        let n = 128;
        let period = 2.0;
        let y: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * i as f64 / n as f64).cos())
            .collect();
        let s = PeriodicSpline::new(period, y);
        for k in 0..300 {
            let x = -1.0 + k as f64 * 0.0137;
            let exact = (PI * x).cos();
            assert!((s.eval(x) - exact).abs() < 1e-7, "x={x}");
            let err = (s.derivative(x) + PI * (PI * x).sin()).abs();
            assert!(err < 1e-4, "x={x} err={err}");
        }
    }

    #[test]
    fn derivative_is_consistent_with_value() {
        let n = 64;
        let y: Vec<f64> = (0..n)
            .map(|i| (-((i as f64 - 32.0) / 6.0).powi(2)).exp())
            .collect();
        let s = PeriodicSpline::new(1.0, y);
        let h = 1e-6;
        for k in 0..50 {
            let x = 0.013 + k as f64 * 0.019;
            let fd = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }
}
