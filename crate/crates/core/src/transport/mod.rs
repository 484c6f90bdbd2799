//! Trajectory transport: continuum integration, classical impulses on
//! instantaneous snapshots, semi-classical kinks, and ensemble statistics.

mod correlated;
mod ensemble;
mod integrate;
mod snapshot;
mod survival;
mod trajectory;

pub use correlated::{correlated_displacement_field, debye_wavenumber, DisplacementField, PhononCorrelationModel};
pub use ensemble::{
    compare_outputs, resolve_threads, run_ensemble, summarize, Comparison, EnsembleOutput, EventStats, SimulationResult,
};
pub use integrate::{
    integrate_cm, stability_bound, step_cm, step_cm_with, step_continuum, AdaptiveOptions, AdaptiveStats, ThornField,
};
pub use snapshot::{
    make_snapshot, Constituents, ImpulseCounters, ImpulseKicker, Region, Snapshot, SnapshotAtom, SnapshotElectron,
    Snapshotter,
};
pub use survival::{estimate_dechanneling_length, survival_curve, FitStatus, LdFit, SurvivalCurve};
pub use trajectory::{
    detect_dechanneling, run_cm_trajectory, run_continuum_trajectory, run_scm_trajectory, CmOptions, KinkEvent, KinkLog,
    ModelKind, TrajectoryRecord, TransportContext, TransportOptions,
};
