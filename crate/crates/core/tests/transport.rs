use thornsim::model::{BeamConfig, CrystalModel, EntryDistribution, Particle};
use thornsim::sampler::{KernelOptions, RandomStream};
use thornsim::transport::{
    estimate_dechanneling_length, run_ensemble, run_scm_trajectory, FitStatus, ModelKind, TransportContext,
    TransportOptions,
};

fn electrons() -> BeamConfig {
    BeamConfig {
        particle: Particle::Electron,
        energy_mev: 1000.0,
        entry_angle_mrad: 0.0,
        entry: EntryDistribution::Uniform,
    }
}

fn scm_context(depth_nm: f64, rate_scale: f64) -> TransportContext {
    let mut opts = TransportOptions {
        kernel: KernelOptions::coarse(),
        ..TransportOptions::default()
    };
    opts.kernel.rate_scale = rate_scale;
    TransportContext::build(&CrystalModel::si_110(), &electrons(), depth_nm, None, &[ModelKind::Scm], &opts).unwrap()
}

#[test]
fn without_collisions_nothing_dechannels_and_eperp_holds() {
    let ctx = scm_context(20_000.0, 0.0);
    for i in 0..8 {
        let (rec, log) = run_scm_trajectory(&ctx, i, &mut RandomStream::new(2, i)).unwrap();
        assert!(log.is_empty());
        let e0 = rec.samples[0][1];
        if e0 >= ctx.u0_ev {
            continue;
        }
        assert_eq!(rec.dechanneled_at_nm, None);
        for s in &rec.samples {
            assert!((s[1] - e0).abs() < 1e-3 * ctx.u0_ev, "{} vs {e0}", s[1]);
        }
    }
}

#[test]
fn kinks_concentrate_at_the_planes() {
    let ctx = scm_context(1000.0, 1.0);
    let k = ctx.kernel().unwrap();
    let d = ctx.crystal.channel_spacing_nm();
    let at_plane = k.planar_rates(0.0).unwrap();
    let mid = k.planar_rates(0.5 * d).unwrap();
    // the thermal site factor confines atom collisions to a few u1 around the plane
    assert!(at_plane[0] > 100.0 * mid[0].max(1e-300), "{} vs {}", at_plane[0], mid[0]);
    let total = |v: &[f64]| v.iter().sum::<f64>();
    assert!(total(&at_plane) > 2.0 * total(&mid));
}

#[test]
fn doubling_the_rates_halves_the_dechanneling_length() {
    let depth = 10_000.0;
    let window = [0.3 * depth, depth];
    let fit = |scale: f64| {
        let ctx = scm_context(depth, scale);
        let out = run_ensemble(&ctx, ModelKind::Scm, 600, 9, 1).unwrap();
        estimate_dechanneling_length(&out.escapes(), window).unwrap()
    };
    let one = fit(1.0);
    let two = fit(2.0);
    assert_eq!(one.status, FitStatus::Ok);
    assert_eq!(two.status, FitStatus::Ok);
    let ratio = two.l_um / one.l_um;
    let err = ratio * ((one.err_um / one.l_um).powi(2) + (two.err_um / two.l_um).powi(2)).sqrt();
    assert!((ratio - 0.5).abs() < 3.0 * err, "ratio {ratio} ± {err}");
}
