//! Survival curve and dechanneling length of a synthetic exponential
//! ensemble.

use rand::Rng;
use rand_distr::Exp1;
use thornsim::sampler::RandomStream;
use thornsim::transport::{estimate_dechanneling_length, survival_curve};

fn main() -> thornsim::Result<()> {
    let (l_nm, depth) = (6000.0, 10_000.0);
    let mut rng = RandomStream::new(3, 0);
    let escapes: Vec<Option<f64>> = (0..2000)
        .map(|_| {
            let z = l_nm * rng.sample::<f64, _>(Exp1);
            (z <= depth).then_some(z)
        })
        .collect();
    let s = survival_curve(&escapes, depth, 5)?;
    for (z, f) in s.depth_um.iter().zip(&s.fraction) {
        println!("{z:>5.1} um  {f:.3}");
    }
    let fit = estimate_dechanneling_length(&escapes, [0.5 * depth, depth])?;
    println!("L_d = {:.2} ± {:.2} um (true {:.2}), {:?}", fit.l_um, fit.err_um, l_nm / 1e3, fit.status);
    Ok(())
}
