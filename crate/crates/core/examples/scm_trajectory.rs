//! One semi-classical trajectory with its kink log.

use thornsim::model::{BeamConfig, CrystalModel, EntryDistribution, Particle};
use thornsim::sampler::{KernelOptions, RandomStream};
use thornsim::transport::{run_scm_trajectory, ModelKind, TransportContext, TransportOptions};

fn main() -> thornsim::Result<()> {
    let beam = BeamConfig {
        particle: Particle::Electron,
        energy_mev: 1000.0,
        entry_angle_mrad: 0.0,
        entry: EntryDistribution::Uniform,
    };
    let opts = TransportOptions {
        kernel: KernelOptions::coarse(),
        ..TransportOptions::default()
    };
    let ctx = TransportContext::build(&CrystalModel::si_110(), &beam, 5000.0, None, &[ModelKind::Scm], &opts)?;
    let (rec, log) = run_scm_trajectory(&ctx, 0, &mut RandomStream::new(4, 0))?;
    println!("U0 = {:.2} eV, entry E_perp = {:.2} eV", ctx.u0_ev, rec.samples[0][1]);
    for k in log.events.iter().take(15) {
        println!(
            "z {:>8.1} nm {:>8} |q| {:.3e} MeV  E_perp {:>7.3} -> {:>7.3} eV",
            k.z_nm,
            k.kind.as_str(),
            k.q[0].hypot(k.q[1]),
            k.eperp_before_ev,
            k.eperp_after_ev
        );
    }
    match rec.dechanneled_at_nm {
        Some(z) => println!("{} kinks, dechanneled at {z:.0} nm", log.len()),
        None => println!("{} kinks, still channeled at {:.0} nm", log.len(), rec.end_nm),
    }
    Ok(())
}
