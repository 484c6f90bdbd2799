//! Frozen instantaneous positions of the atoms and electrons around a
//! trajectory segment, and the thorns and straight-path impulses they exert.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use super::correlated::DisplacementField;
use super::integrate::ThornField;
use crate::error::{Error, Result};
use crate::model::{ChannelGeometry, CrystalModel};
use crate::potentials::thorn::ELECTRON_CORE_NM;
use crate::potentials::{RadialShape, ScreeningModel, Thorn, ThornElectron, ThornVib};
use crate::sampler::RandomStream;
use crate::units::{COULOMB_EV_NM, EV_PER_MEV};
use crate::xsection::classical::KickTable;
use crate::xsection::FormFactorModel;

/// Atom and electron model shared by snapshots and kick tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Constituents {
    pub z: f64,
    pub screening: ScreeningModel,
    pub ff: FormFactorModel,
    /// Width of the independent site noise; the smeared atom uses the same.
    pub u1: f64,
}

impl Constituents {
    /// Molière atom of the crystal with one Yukawa shell per screening term.
    pub fn for_crystal(crystal: &CrystalModel) -> Self {
        let screening = ScreeningModel::moliere(crystal.a_tf_nm, crystal.r_n_nm);
        let z = crystal.z as f64;
        Self {
            ff: FormFactorModel::from_screening(&screening, z),
            screening,
            z,
            u1: crystal.u1_nm,
        }
    }

    pub fn with_u1(mut self, u1: f64) -> Self {
        self.u1 = u1;
        self
    }
}

/// Cylinder around the trajectory: transverse centre and radius, depth range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub center: [f64; 2],
    pub radius: f64,
    pub z_range: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotElectron {
    pub shell: usize,
    /// Offset from the instantaneous nucleus.
    pub offset: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotAtom {
    /// Mean lattice site.
    pub site: [f64; 3],
    /// Long-wavelength displacement shared with the neighbourhood.
    pub shift: [f64; 3],
    /// Independent thermal displacement.
    pub u: [f64; 3],
    electrons: [u32; 2],
}

impl SnapshotAtom {
    /// Total displacement from the mean site.
    pub fn displacement(&self) -> [f64; 3] {
        [self.shift[0] + self.u[0], self.shift[1] + self.u[1], self.shift[2] + self.u[2]]
    }

    pub fn nucleus(&self) -> [f64; 3] {
        let d = self.displacement();
        [self.site[0] + d[0], self.site[1] + d[1], self.site[2] + d[2]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Snapshot {
    pub seed: u64,
    /// Atoms ordered by depth.
    pub atoms: Vec<SnapshotAtom>,
    electrons: Vec<SnapshotElectron>,
}

impl Snapshot {
    pub fn electrons_of(&self, atom: &SnapshotAtom) -> &[SnapshotElectron] {
        &self.electrons[atom.electrons[0] as usize..atom.electrons[1] as usize]
    }

    pub fn electron_count(&self) -> usize {
        self.electrons.len()
    }

    /// Thorns of every constituent, for the adaptive integrator.
    pub fn thorn_field(&self, c: &Constituents) -> ThornField {
        let mut thorns = Vec::with_capacity(self.atoms.len() + self.electrons.len());
        for a in &self.atoms {
            let origin = [a.site[0] + a.shift[0], a.site[1] + a.shift[1], a.site[2] + a.shift[2]];
            let vib = ThornVib {
                z: c.z,
                screening: c.screening.clone(),
                u1: c.u1,
                u: a.u,
            };
            thorns.push(translate(vib.thorn(), origin));
            for e in self.electrons_of(a) {
                let orbital = c.ff.shells[e.shell].orbital;
                thorns.push(translate(ThornElectron::new(orbital, e.offset, a.u).thorn(), origin));
            }
        }
        ThornField::new(thorns)
    }
}

fn translate(mut t: Thorn, by: [f64; 3]) -> Thorn {
    for p in &mut t.parts {
        for i in 0..3 {
            p.center[i] += by[i];
        }
    }
    t
}

/// Populates snapshots for one crystal.
#[derive(Debug, Clone)]
pub struct Snapshotter {
    geometry: ChannelGeometry,
    constituents: Constituents,
    /// Electrons of shell k are placed only on atoms whose site lies within
    /// this transverse distance of the region centre.
    electron_reach: Vec<f64>,
}

impl Snapshotter {
    pub fn new(crystal: &CrystalModel, constituents: Constituents) -> Result<Self> {
        crystal.validate()?;
        let n = constituents.ff.shells.len();
        Ok(Self {
            geometry: crystal.geometry.clone(),
            constituents,
            electron_reach: vec![f64::INFINITY; n],
        })
    }

    /// Limit shell k to `factor / beta_k` around the path.
    pub fn with_electron_reach(mut self, factor: f64) -> Self {
        self.electron_reach = self
            .constituents
            .ff
            .shells
            .iter()
            .map(|s| factor / s.orbital.beta)
            .collect();
        self
    }

    pub fn without_electrons(mut self) -> Self {
        self.electron_reach = vec![-1.0; self.electron_reach.len()];
        self
    }

    pub fn constituents(&self) -> &Constituents {
        &self.constituents
    }

    pub fn generate(&self, region: &Region, seed: u64, field: Option<&DisplacementField>) -> Result<Snapshot> {
        let mut out = Snapshot::default();
        self.fill(&mut out, region, seed, field)?;
        Ok(out)
    }

    /// Regenerate `out` in place; the same seed gives the same snapshot.
    pub fn fill(&self, out: &mut Snapshot, region: &Region, seed: u64, field: Option<&DisplacementField>) -> Result<()> {
        let [z0, z1] = region.z_range;
        if !(region.radius.is_finite()
            && region.radius > 0.0
            && z0.is_finite()
            && z1.is_finite()
            && z1 >= z0
            && region.center.iter().all(|v| v.is_finite()))
        {
            return Err(Error::domain("snapshot region must be finite with a positive radius"));
        }
        out.seed = seed;
        out.atoms.clear();
        out.electrons.clear();
        let mut rng = RandomStream::new(seed, 0);
        let r = region.radius;
        let [cx, cy] = region.center;
        let mut push = |site: [f64; 3], rng: &mut RandomStream| {
            let (shift, u) = match field {
                Some(f) => (f.long(site), gauss3(f.model().u_short_nm, rng)),
                None => ([0.0; 3], gauss3(self.constituents.u1, rng)),
            };
            out.atoms.push(SnapshotAtom {
                site,
                shift,
                u,
                electrons: [0, 0],
            });
        };
        match &self.geometry {
            ChannelGeometry::Planar {
                spacing_nm,
                areal_density_nm2,
                ..
            } => {
                let j0 = ((cx - r) / spacing_nm).ceil() as i64;
                let j1 = ((cx + r) / spacing_nm).floor() as i64;
                for j in j0..=j1 {
                    let x = j as f64 * spacing_nm;
                    let half = (r * r - (x - cx) * (x - cx)).max(0.0).sqrt();
                    let mean = areal_density_nm2 * 2.0 * half * (z1 - z0);
                    if mean <= 0.0 {
                        continue;
                    }
                    let n = Poisson::new(mean)
                        .map_err(|e| Error::domain(format!("site count: {e}")))?
                        .sample(&mut rng) as usize;
                    for _ in 0..n {
                        let y = cy - half + 2.0 * half * rng.gen::<f64>();
                        let z = z0 + (z1 - z0) * rng.gen::<f64>();
                        push([x, y, z], &mut rng);
                    }
                }
            }
            ChannelGeometry::Axial {
                cell_nm,
                strings_nm,
                period_nm,
                ..
            } => {
                let m0 = (z0 / period_nm).ceil() as i64;
                let m1 = (z1 / period_nm).ceil() as i64;
                for s in strings_nm {
                    let ix0 = ((cx - r - s[0]) / cell_nm[0]).ceil() as i64;
                    let ix1 = ((cx + r - s[0]) / cell_nm[0]).floor() as i64;
                    let iy0 = ((cy - r - s[1]) / cell_nm[1]).ceil() as i64;
                    let iy1 = ((cy + r - s[1]) / cell_nm[1]).floor() as i64;
                    for ix in ix0..=ix1 {
                        for iy in iy0..=iy1 {
                            let x = s[0] + ix as f64 * cell_nm[0];
                            let y = s[1] + iy as f64 * cell_nm[1];
                            if (x - cx).powi(2) + (y - cy).powi(2) > r * r {
                                continue;
                            }
                            for m in m0..m1 {
                                push([x, y, m as f64 * period_nm], &mut rng);
                            }
                        }
                    }
                }
            }
        }
        out.atoms.sort_by(|a, b| a.site[2].total_cmp(&b.site[2]));
        let shells = &self.constituents.ff.shells;
        for a in out.atoms.iter_mut() {
            let start = out.electrons.len() as u32;
            let d2 = (a.site[0] - cx).powi(2) + (a.site[1] - cy).powi(2);
            for (k, sh) in shells.iter().enumerate() {
                let reach = self.electron_reach[k];
                if d2 > reach * reach {
                    continue;
                }
                // fractional occupations are rounded stochastically
                let whole = sh.occupation.floor();
                let extra = (rng.gen::<f64>() < sh.occupation - whole) as usize;
                for _ in 0..whole as usize + extra {
                    out.electrons.push(SnapshotElectron {
                        shell: k,
                        offset: sh.orbital.sample_offset(&mut rng),
                    });
                }
            }
            a.electrons = [start, out.electrons.len() as u32];
        }
        Ok(())
    }
}

fn gauss3<R: Rng + ?Sized>(s: f64, rng: &mut R) -> [f64; 3] {
    [
        s * rng.sample::<f64, _>(StandardNormal),
        s * rng.sample::<f64, _>(StandardNormal),
        s * rng.sample::<f64, _>(StandardNormal),
    ]
}

/// Snapshot of all constituents within `region`, electrons of every shell
/// included. The snapshot seed is drawn from `rng`.
pub fn make_snapshot<R: RngCore + ?Sized>(
    crystal: &CrystalModel,
    region: &Region,
    rng: &mut R,
    correlations: Option<&DisplacementField>,
) -> Result<Snapshot> {
    let c = match correlations {
        Some(f) => Constituents::for_crystal(crystal).with_u1(f.model().u_short_nm),
        None => Constituents::for_crystal(crystal),
    };
    Snapshotter::new(crystal, c)?.generate(region, rng.next_u64(), correlations)
}

/// Straight-path impulses of snapshot constituents from prebuilt kick tables.
#[derive(Debug, Clone)]
pub struct ImpulseKicker {
    atom: KickTable,
    smeared: KickTable,
    point_core: KickTable,
    clouds: Vec<KickTable>,
    /// Kinematic cap on a single electron transfer, MeV.
    cap: f64,
    charge_scale: f64,
}

/// Per-trajectory counters of the impulse model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ImpulseCounters {
    pub atoms: u64,
    pub electrons: u64,
    /// Electron transfers truncated at the kinematic cap.
    pub truncated: u64,
}

const KICK_PER_DECADE: usize = 48;

impl ImpulseKicker {
    pub fn new(c: &Constituents, electron_cap_mev: f64) -> Result<Self> {
        let atom = KickTable::new(
            &RadialShape::Atomic {
                z: c.z,
                screening: c.screening.clone(),
            },
            KICK_PER_DECADE,
        )?;
        let smeared = KickTable::new(
            &RadialShape::SmearedAtomic {
                z: c.z,
                screening: c.screening.clone(),
                u1: c.u1,
            },
            KICK_PER_DECADE,
        )?;
        let point_core = KickTable::new(
            &RadialShape::PointCharge {
                charge: -1.0,
                r_reg: ELECTRON_CORE_NM,
            },
            KICK_PER_DECADE,
        )?;
        let clouds = c
            .ff
            .shells
            .iter()
            .map(|s| {
                KickTable::new(
                    &RadialShape::Cloud {
                        charge: 1.0,
                        orbital: s.orbital,
                    },
                    KICK_PER_DECADE,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            atom,
            smeared,
            point_core,
            clouds,
            cap: electron_cap_mev,
            charge_scale: 1.0,
        })
    }

    /// Multiply every thorn charge by `scale`; zero switches the kicks off.
    pub fn with_charge_scale(mut self, scale: f64) -> Self {
        self.charge_scale = scale;
        self
    }

    #[inline]
    fn radial(table: &KickTable, d: [f64; 2]) -> [f64; 2] {
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if n == 0.0 {
            return [0.0; 2];
        }
        let k = table.eval(n) / (EV_PER_MEV * n);
        [k * d[0], k * d[1]]
    }

    #[inline]
    fn point(&self, d: [f64; 2]) -> [f64; 2] {
        let n2 = d[0] * d[0] + d[1] * d[1];
        let core = 100.0 * ELECTRON_CORE_NM;
        if n2 < core * core {
            return Self::radial(&self.point_core, d);
        }
        // bare Coulomb kick of a unit negative charge: -2 alpha hbar c / b
        let k = -2.0 * COULOMB_EV_NM / (EV_PER_MEV * n2);
        [k * d[0], k * d[1]]
    }

    /// Transfer (MeV) from one atom and its electrons to a particle of charge
    /// sign `charge` crossing at transverse position `r`.
    pub fn kick(&self, snap: &Snapshot, atom: &SnapshotAtom, r: [f64; 2], charge: i8, counters: &mut ImpulseCounters) -> [f64; 2] {
        if self.charge_scale == 0.0 {
            return [0.0; 2];
        }
        let b = [r[0] - atom.site[0] - atom.shift[0], r[1] - atom.site[1] - atom.shift[1]];
        let bu = [b[0] - atom.u[0], b[1] - atom.u[1]];
        let qa = Self::radial(&self.atom, bu);
        let qs = Self::radial(&self.smeared, b);
        let mut q = [qa[0] - qs[0], qa[1] - qs[1]];
        counters.atoms += 1;
        let electrons = snap.electrons_of(atom);
        let mut last_shell = usize::MAX;
        let mut cloud = [0.0; 2];
        for e in electrons {
            if e.shell != last_shell {
                cloud = Self::radial(&self.clouds[e.shell], bu);
                last_shell = e.shell;
            }
            let mut qp = self.point([bu[0] - e.offset[0], bu[1] - e.offset[1]]);
            let m = (qp[0] * qp[0] + qp[1] * qp[1]).sqrt();
            if m > self.cap {
                qp = [qp[0] * self.cap / m, qp[1] * self.cap / m];
                counters.truncated += 1;
            }
            q[0] += qp[0] + cloud[0];
            q[1] += qp[1] + cloud[1];
        }
        counters.electrons += electrons.len() as u64;
        let s = charge as f64 * self.charge_scale;
        [s * q[0], s * q[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::correlated::correlated_displacement_field;

    fn region(z1: f64) -> Region {
        Region {
            center: [0.05, 0.0],
            radius: CrystalModel::si_110().lattice_constant_nm,
            z_range: [0.0, z1],
        }
    }

    #[test]
    fn same_seed_same_snapshot() {
        let c = CrystalModel::si_110();
        let s = Snapshotter::new(&c, Constituents::for_crystal(&c)).unwrap();
        let a = s.generate(&region(2.0), 77, None).unwrap();
        let b = s.generate(&region(2.0), 77, None).unwrap();
        assert_eq!(a, b);
        let other = s.generate(&region(2.0), 78, None).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn site_count_and_displacements() {
        let c = CrystalModel::si_110();
        let s = Snapshotter::new(&c, Constituents::for_crystal(&c)).unwrap().without_electrons();
        let reg = region(200.0);
        let snap = s.generate(&reg, 5, None).unwrap();
        let want = c.atom_density_nm3() * std::f64::consts::PI * reg.radius.powi(2) * 200.0;
        let n = snap.atoms.len() as f64;
        // planes cut the disc into strips, so allow a few percent of geometry
        assert!((n / want - 1.0).abs() < 0.06, "{n} vs {want}");
        let mut m = [0.0; 3];
        let mut v = [0.0; 3];
        for a in &snap.atoms {
            for i in 0..3 {
                m[i] += a.u[i] / n;
                v[i] += a.u[i] * a.u[i] / n;
            }
            assert!((a.site[0] - reg.center[0]).powi(2) + (a.site[1] - reg.center[1]).powi(2) <= reg.radius.powi(2));
        }
        for i in 0..3 {
            assert!(m[i].abs() < 5.0 * c.u1_nm / n.sqrt());
            assert!((v[i] / c.u1_nm.powi(2) - 1.0).abs() < 5.0 * (2.0 / n).sqrt());
        }
        assert!(snap.atoms.windows(2).all(|w| w[0].site[2] <= w[1].site[2]));
    }

    #[test]
    fn electrons_follow_occupations() {
        let c = CrystalModel::si_110();
        let s = Snapshotter::new(&c, Constituents::for_crystal(&c)).unwrap();
        let snap = s.generate(&region(20.0), 9, None).unwrap();
        let per_atom = snap.electron_count() as f64 / snap.atoms.len() as f64;
        assert!((per_atom - 14.0).abs() < 0.1, "{per_atom}");
    }

    #[test]
    fn uncorrelated_neighbours_differ_by_two_variances() {
        let c = CrystalModel::si_100_axial();
        let s = Snapshotter::new(&c, Constituents::for_crystal(&c)).unwrap().without_electrons();
        let reg = Region {
            center: [0.0, 0.0],
            radius: 0.01,
            z_range: [0.0, 20000.0],
        };
        let snap = s.generate(&reg, 1, None).unwrap();
        let mut acc = 0.0;
        let pairs = snap.atoms.len() - 1;
        for w in snap.atoms.windows(2) {
            acc += (w[1].u[0] - w[0].u[0]).powi(2);
        }
        let ratio = acc / pairs as f64 / (2.0 * c.u1_nm.powi(2));
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn correlated_displacements_keep_the_site_variance() {
        let c = CrystalModel::si_100_axial();
        let mut rng = RandomStream::new(12, 0);
        let reg = Region {
            center: [0.0, 0.0],
            radius: 0.01,
            z_range: [0.0, 2000.0],
        };
        let (mut var, mut n) = (0.0, 0.0);
        for _ in 0..40 {
            let f = correlated_displacement_field(&c, 10.0 * c.lattice_constant_nm, &mut rng).unwrap();
            let snap = make_snapshot(&c, &reg, &mut rng, Some(&f)).unwrap();
            for a in &snap.atoms {
                let d = a.displacement();
                var += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                n += 3.0;
            }
        }
        let ratio = var / n / c.u1_nm.powi(2);
        assert!((ratio - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn impulses_match_thorn_kicks() {
        let c = CrystalModel::si_110();
        let cons = Constituents::for_crystal(&c);
        let s = Snapshotter::new(&c, cons.clone()).unwrap();
        let snap = s.generate(&region(0.3), 21, None).unwrap();
        let kicker = ImpulseKicker::new(&cons, f64::INFINITY).unwrap();
        let field = snap.thorn_field(&cons);
        let r = [0.051, 0.003];
        let mut counters = ImpulseCounters::default();
        let mut total = [0.0; 2];
        for a in &snap.atoms {
            let q = kicker.kick(&snap, a, r, 1, &mut counters);
            total[0] += q[0];
            total[1] += q[1];
        }
        let mut want = [0.0; 2];
        for t in field.thorns() {
            let q = t.kick(r).unwrap();
            want[0] += q[0];
            want[1] += q[1];
        }
        let scale = want[0].abs().max(want[1].abs());
        for i in 0..2 {
            assert!((total[i] - want[i]).abs() < 1e-3 * scale, "{total:?} vs {want:?}");
        }
        let off = ImpulseKicker::new(&cons, f64::INFINITY).unwrap().with_charge_scale(0.0);
        assert_eq!(off.kick(&snap, &snap.atoms[0], r, 1, &mut counters), [0.0; 2]);
    }
}
