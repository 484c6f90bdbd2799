//! A 1 GeV electron oscillating about a Si(110) plane in the continuum
//! potential; prints the measured period and the E_perp drift.

use thornsim::model::{transverse_energy, CrystalModel, Particle, ParticleState};
use thornsim::potentials::build_continuum;
use thornsim::transport::{step_continuum, Constituents};

fn main() -> thornsim::Result<()> {
    let si = CrystalModel::si_110();
    let v = build_continuum(&si, &Constituents::for_crystal(&si).screening)?;
    println!("well depth U0 = {:.2} eV", v.u0_ev());
    let e = 1000.0;
    let dz = v.min_oscillation_period(e) / 1000.0;
    let x0 = v.minimum_position(-1)[0] + 0.02;
    let mut s = ParticleState::for_particle(Particle::Electron, e, [x0, 0.0, 0.0], [0.0, 0.0])?;
    let e0 = transverse_energy(&s, &v)?;
    let mut crossings = Vec::new();
    let mut prev = s.momentum[0];
    while crossings.len() < 21 {
        s = step_continuum(&s, &v, dz)?;
        if prev < 0.0 && s.momentum[0] >= 0.0 {
            crossings.push(s.depth());
        }
        prev = s.momentum[0];
    }
    let period = (crossings[20] - crossings[0]) / 20.0;
    let drift = transverse_energy(&s, &v)? / e0 - 1.0;
    println!("E_perp = {e0:.3} eV, period {:.3} um, relative drift {drift:.1e}", period / 1e3);
    Ok(())
}
