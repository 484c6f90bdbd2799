//! Momentum transfers drawn from a Born table, compared with the table's
//! own moments.

use thornsim::model::CrystalModel;
use thornsim::sampler::{sample_q, RandomStream};
use thornsim::transport::Constituents;
use thornsim::units::HBAR_C;
use thornsim::xsection::{atom_table, QGrid};

fn main() -> thornsim::Result<()> {
    let si = CrystalModel::si_110();
    let c = Constituents::for_crystal(&si);
    let grid = QGrid::new(0.01 * HBAR_C * c.ff.min_beta(), HBAR_C / si.r_n_nm, 32, 32)?;
    let xs = atom_table(&c.ff, [si.u1_nm, 0.0], si.u1_nm, grid, true)?;
    let n = 200_000;
    let mut rng = RandomStream::new(1, 0);
    let (mut mx, mut mq2) = (0.0, 0.0);
    for _ in 0..n {
        let q = sample_q(&xs, &mut rng)?;
        mx += q[0];
        mq2 += q[0] * q[0] + q[1] * q[1];
    }
    let (first, _) = xs.first_moment()?;
    println!("sigma = {:.4e} nm^2", xs.total());
    println!("<q_x>: sampled {:.3e}, table {:.3e} MeV", mx / n as f64, first[0] / xs.total());
    println!("<q^2>: sampled {:.4e}, table {:.4e} MeV^2", mq2 / n as f64, xs.second_moment()? / xs.total());
    Ok(())
}
