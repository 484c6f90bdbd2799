//! Long-wavelength phonon field: variance split and neighbour pair spread
//! along a Si<100> string.

use thornsim::model::CrystalModel;
use thornsim::sampler::RandomStream;
use thornsim::transport::{correlated_displacement_field, Constituents, PhononCorrelationModel, Region, Snapshotter};

fn main() -> thornsim::Result<()> {
    let c = CrystalModel::si_100_axial();
    let snap = Snapshotter::new(&c, Constituents::for_crystal(&c))?.without_electrons();
    let region = Region {
        center: [0.0, 0.0],
        radius: 0.01,
        z_range: [0.0, 2000.0],
    };
    let mut rng = RandomStream::new(5, 0);
    for lambda in [5.0, 10.0, 40.0] {
        let lc = lambda * c.lattice_constant_nm;
        let m = PhononCorrelationModel::new(&c, lc)?;
        let (mut acc, mut n) = (0.0, 0.0);
        for seed in 0..50 {
            let f = correlated_displacement_field(&c, lc, &mut rng)?;
            let s = snap.generate(&region, seed, Some(&f))?;
            for w in s.atoms.windows(2) {
                let (a, b) = (w[0].displacement(), w[1].displacement());
                acc += (0..3).map(|i| (b[i] - a[i]).powi(2)).sum::<f64>();
                n += 3.0;
            }
        }
        println!(
            "lambda_c = {lambda:>4} a: u_long {:.2e} nm, u_short {:.2e} nm, pair rms {:.4} u1",
            m.u_long_nm,
            m.u_short_nm,
            (acc / n).sqrt() / c.u1_nm
        );
    }
    Ok(())
}
