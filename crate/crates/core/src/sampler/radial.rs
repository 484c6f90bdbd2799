//! Cubic interpolant of a function of a radius on [0, r_max], tabulated in
//! the stretched coordinate t = ln(1 + r / s0) so that small radii get
//! denser nodes.

use crate::error::Result;
use crate::numerics::CubicSpline;

#[derive(Debug, Clone)]
pub struct RadialTable {
    spline: CubicSpline,
    s0: f64,
    r_max: f64,
    /// Value returned beyond `r_max`.
    beyond: Beyond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beyond {
    Clamp,
    Zero,
}

impl RadialTable {
    pub fn build<F>(r_max: f64, s0: f64, n: usize, beyond: Beyond, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let t_max = (r_max / s0).ln_1p();
        let mut ts = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let t = t_max * i as f64 / (n - 1) as f64;
            let r = if i == n - 1 { r_max } else { s0 * t.exp_m1() };
            ts.push(t);
            ys.push(f(r)?);
        }
        Ok(Self::from_nodes(ts, ys, s0, r_max, beyond))
    }

    /// Same, with node values computed in parallel.
    pub fn build_par<F>(r_max: f64, s0: f64, n: usize, beyond: Beyond, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        use rayon::prelude::*;
        let t_max = (r_max / s0).ln_1p();
        let ts: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        let ys = ts
            .par_iter()
            .enumerate()
            .map(|(i, &t)| f(if i == n - 1 { r_max } else { s0 * t.exp_m1() }))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self::from_nodes(ts, ys, s0, r_max, beyond))
    }

    fn from_nodes(ts: Vec<f64>, ys: Vec<f64>, s0: f64, r_max: f64, beyond: Beyond) -> Self {
        Self {
            spline: CubicSpline::natural(ts, ys),
            s0,
            r_max,
            beyond,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        if r > self.r_max {
            return match self.beyond {
                Beyond::Clamp => self.spline.eval(self.spline.x_max()),
                Beyond::Zero => 0.0,
            };
        }
        self.spline.eval((r.max(0.0) / self.s0).ln_1p())
    }

    pub fn max_node(&self) -> f64 {
        self.spline.nodes().1.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Node radii.
    pub fn radii(&self) -> Vec<f64> {
        self.spline.nodes().0.iter().map(|t| self.s0 * t.exp_m1()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_a_log_like_function() {
        let f = |r: f64| Ok((1.0 + r / 0.01).ln() + 2.0);
        let t = RadialTable::build(1.0, 0.01, 64, Beyond::Clamp, f).unwrap();
        for i in 0..500 {
            let r = i as f64 / 499.0;
            let want = f(r).unwrap();
            assert!((t.eval(r) / want - 1.0).abs() < 1e-6);
        }
        assert!((t.eval(5.0) - f(1.0).unwrap()).abs() < 1e-12);
    }
}
