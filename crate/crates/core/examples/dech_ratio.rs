//! Classical over quantum single-collision dechanneling cross section for
//! atom and electron thorns, with the q_c at which the atom ratio hits 1.43.

use thornsim::model::CrystalModel;
use thornsim::xsection::dech::{dech_ratio, ratio_scan, CaseCutoffs, DechCase};

fn main() -> thornsim::Result<()> {
    let si = CrystalModel::si_110();
    for case in [DechCase::Electron, DechCase::Atom] {
        let r = dech_ratio(case, &si, 1000.0, 0.511, 1.0)?;
        println!("{case:?}: ratio {:.4} (numeric {:.4}) at q_c = 1 MeV", r.ratio, r.ratio_numeric);
    }
    let atom = CaseCutoffs::new(DechCase::Atom, &si, 1000.0, 0.511)?;
    println!("atom ratio 1.43 at q_c = {:.3} MeV", atom.invert_ratio(1.43)?);
    for (q, v) in ratio_scan(&atom, &[0.3, 1.0, 3.0, 10.0, 30.0]) {
        println!("  q_c {q:>5} MeV  ratio {v:.4}");
    }
    Ok(())
}
