//! Born and classical cross sections of one thorn relative to Rutherford.
//! The classical curve stops at the largest kick with a rainbow pile-up.

use thornsim::potentials::PhenomenologicalThorn;
use thornsim::xsection::fig2::fig2_data;

fn main() -> thornsim::Result<()> {
    let thorn = PhenomenologicalThorn::new(14.0, 0.0075, 3e-6)?;
    let data = fig2_data(&thorn, 1e-2, 100.0, 8)?;
    println!("largest classical kick {:.3} MeV at b = {:.2e} nm", data.max_kick_mev, data.b_at_max_nm);
    println!("{:>10} {:>10} {:>10}", "q MeV", "Born", "classical");
    for r in &data.rows {
        println!("{:>10.3e} {:>10.4} {:>10.4}", r.q_mev, r.quantum, r.classical);
    }
    Ok(())
}
