//! Azimuth-averaged quantum and classical dσ/d²q for an atom thorn
//! displaced by u1 and for an electron thorn.

use thornsim::io::cli::xsection_rows;
use thornsim::io::config::{RunConfig, ThornChoice};

fn main() -> thornsim::Result<()> {
    for thorn in [ThornChoice::Atom, ThornChoice::Electron] {
        let mut cfg = RunConfig::default();
        cfg.xsection.thorn = thorn;
        cfg.xsection.per_decade = 4;
        println!("{thorn:?} thorn");
        for [q, quantum, classical] in xsection_rows(&cfg)? {
            println!("  q {q:>10.3e} MeV  quantum {quantum:>10.3e}  classical {classical:>10.3e} nm^2/MeV^2");
        }
    }
    Ok(())
}
