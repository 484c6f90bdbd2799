//! Second moments of the phenomenological thorn from the Fourier transform
//! and from the eikonal kick, and first moments of displaced thorns.

use thornsim::model::CrystalModel;
use thornsim::potentials::PhenomenologicalThorn;
use thornsim::xsection::sumrules::{sum_rule_second_moment, thorn_first_moments};

fn main() -> thornsim::Result<()> {
    let si = CrystalModel::si_110();
    for ratio in [1e-3, 1e-2] {
        let t = PhenomenologicalThorn::new(14.0, si.u1_nm, ratio * si.u1_nm)?;
        let r = sum_rule_second_moment(&t)?;
        println!(
            "r_min/r_max = {ratio:e}: quantum {:.5e}, classical {:.5e} MeV^2 nm^2",
            r.second_moment_quantum.value, r.second_moment_classical.value
        );
    }
    let f = thorn_first_moments(&si, 16)?;
    println!("relative first moments: atom {:.1e}, electron {:.1e}, classical atom {:.1e}",
        f.atom_quantum.relative(), f.electron_quantum.relative(), f.atom_classical.relative());
    Ok(())
}
