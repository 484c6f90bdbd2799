//! Classical integration through one isolated thorn against the eikonal
//! kick integral.

use thornsim::model::ParticleState;
use thornsim::potentials::{ContinuumPotential, PhenomenologicalThorn};
use thornsim::transport::{integrate_cm, AdaptiveOptions, ThornField};
use thornsim::xsection::classical::classical_kick;

fn main() -> thornsim::Result<()> {
    let thorn = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6)?.thorn()?;
    let flat = ContinuumPotential::planar_from_fn(1.0, 16, |_| 0.0)?;
    let field = ThornField::new(vec![thorn.clone()]);
    for b in [3e-5, 3e-4, 3e-3, 2e-2] {
        let s = ParticleState::new(1000.0, 0.511, 1, [b, 0.0, -0.3], [0.0, 0.0])?;
        let (out, stats) = integrate_cm(&s, &field, &flat, 0.05, 12, &AdaptiveOptions::default())?;
        let want = classical_kick([b, 0.0], &thorn)?;
        println!(
            "b = {b:.0e} nm: integrated {:.5e} MeV, eikonal {:.5e} MeV ({} substeps)",
            out.momentum[0], want[0], stats.accepted
        );
    }
    Ok(())
}
