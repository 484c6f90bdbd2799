//! Collision probabilities along a trajectory, and the random draws of
//! momentum transfers, thermal displacements and electron offsets.

mod kernel;
pub mod radial;

pub use kernel::{Collision, CollisionKernel, CollisionKind, EventClock, KernelOptions, KernelDiagnostics};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::potentials::OrbitalModel;
use crate::xsection::DifferentialXS;

/// Reproducible random stream: one ChaCha8 key per master seed, one stream
/// per trajectory index.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Transverse momentum transfer (MeV) in the table frame.
pub fn sample_q<R: Rng + ?Sized>(xs: &DifferentialXS, rng: &mut R) -> Result<[f64; 2]> {
    xs.sample(rng)
}

/// Isotropic Gaussian thermal displacement with rms u1 per axis.
pub fn sample_displacement<R: Rng + ?Sized>(u1: f64, rng: &mut R) -> Result<[f64; 3]> {
    if !(u1 > 0.0 && u1.is_finite()) {
        return Err(Error::domain(format!("thermal width must be positive, got {u1}")));
    }
    Ok([
        u1 * rng.sample::<f64, _>(StandardNormal),
        u1 * rng.sample::<f64, _>(StandardNormal),
        u1 * rng.sample::<f64, _>(StandardNormal),
    ])
}

/// Electron position relative to its nucleus drawn from |psi|^2.
pub fn sample_electron_offset<R: Rng + ?Sized>(orbital: &OrbitalModel, rng: &mut R) -> [f64; 3] {
    orbital.sample_offset(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{chi_square_sf, gamma_q};
    use crate::xsection::{QGrid, ThornDescriptor};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RandomStream::new(7, 3);
        let mut b = RandomStream::new(7, 3);
        let mut c = RandomStream::new(7, 4);
        let xa: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..100).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert!(xa.iter().zip(&xc).all(|(p, q)| p != q));
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        let n = 200_000;
        let mut a = RandomStream::new(11, 0);
        let mut b = RandomStream::new(11, 1);
        let mut sxy = 0.0;
        for _ in 0..n {
            let x: f64 = a.gen::<f64>() - 0.5;
            let y: f64 = b.gen::<f64>() - 0.5;
            sxy += x * y;
        }
        // var(x y) = 1/144
        let z = sxy / (n as f64 / 144.0).sqrt();
        assert!(z.abs() < 4.0, "z = {z}");
    }

    #[test]
    fn displacement_moments() {
        let u1 = 0.0075;
        let n = 1_000_000;
        let mut rng = RandomStream::new(1, 0);
        let mut s2 = [0.0; 3];
        let mut sxy = 0.0;
        let mut r2 = 0.0;
        for _ in 0..n {
            let u = sample_displacement(u1, &mut rng).unwrap();
            for i in 0..3 {
                s2[i] += u[i] * u[i];
            }
            sxy += u[0] * u[1];
            r2 += u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        }
        let nf = n as f64;
        for v in s2 {
            assert!((v / nf / (u1 * u1) - 1.0).abs() < 0.01);
        }
        assert!((r2 / nf / (3.0 * u1 * u1) - 1.0).abs() < 0.01);
        // corr has standard error 1/sqrt(n)
        assert!((sxy / nf / (u1 * u1)).abs() < 3.0 / nf.sqrt());
        assert!(sample_displacement(0.0, &mut rng).is_err());
    }

    #[test]
    fn electron_offsets_follow_the_radial_density() {
        let o = OrbitalModel::yukawa_shell(15.5);
        let n = 1_000_000;
        let mut rng = RandomStream::new(5, 9);
        let edges: Vec<f64> = (0..=40).map(|i| 8.0 / o.beta * i as f64 / 40.0).collect();
        let mut counts = vec![0usize; edges.len()];
        let mut mean = [0.0; 3];
        let mut far = 0usize;
        for _ in 0..n {
            let v = sample_electron_offset(&o, &mut rng);
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for i in 0..3 {
                mean[i] += v[i];
            }
            if r > 10.0 * o.radius() {
                far += 1;
            }
            let i = edges.partition_point(|&e| e <= r).saturating_sub(1).min(edges.len() - 1);
            counts[i] += 1;
        }
        // last bin collects everything above the top edge
        let mut chi2 = 0.0;
        for i in 0..edges.len() {
            let p = if i + 1 < edges.len() {
                o.enclosed(edges[i + 1]) - o.enclosed(edges[i])
            } else {
                1.0 - o.enclosed(edges[i])
            };
            let e = p * n as f64;
            chi2 += (counts[i] as f64 - e).powi(2) / e;
        }
        let p = chi_square_sf(chi2, (edges.len() - 1) as f64);
        assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
        let sr = o.mean_square_radius().sqrt() / (n as f64).sqrt();
        for m in mean {
            assert!((m / n as f64).abs() < 4.0 * sr);
        }
        // tail mass beyond ten mean radii: Q(2, 20)
        let tail = gamma_q(2.0, 10.0 * o.radius() * o.beta);
        assert!(tail < 1e-6);
        assert!(far as f64 / n as f64 <= 1e-6);
    }

    #[test]
    fn zero_table_cannot_be_sampled() {
        let grid = QGrid::new(1e-3, 1.0, 8, 4).unwrap();
        let xs = DifferentialXS::from_density(grid, ThornDescriptor::Other("zero".into()), |_, _| 0.0, |_| 0.0, false).unwrap();
        let mut rng = RandomStream::new(0, 0);
        assert!(sample_q(&xs, &mut rng).is_err());
    }
}
