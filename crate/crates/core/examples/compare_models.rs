//! Both models on shared seeds over a short crystal.

use thornsim::io::cli::compare_models;
use thornsim::io::config::RunConfig;

fn main() -> thornsim::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.run.n_trajectories = 40;
    cfg.run.depth_um = 5.0;
    let (cmp, [(_, cm), (_, scm)]) = compare_models(&cfg)?;
    println!("dechanneled at {} um: CM {:.3}, SCM {:.3}", cmp.final_depth_um, cmp.cm_dechanneled, cmp.scm_dechanneled);
    println!("difference {:.3} ± {:.3}, lower 95 % bound {:.3}", cmp.difference, cmp.stderr, cmp.lower_95);
    println!("CM impulses: {} atoms, {} electrons", cm.stats.atom_impulses, cm.stats.electron_impulses);
    println!("SCM kinks: {} atom, {} electron", scm.stats.vib_kinks, scm.stats.electron_kinks);
    Ok(())
}
