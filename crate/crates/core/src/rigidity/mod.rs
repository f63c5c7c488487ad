//! Shape-optimization probes: minimize the area-weighted variance of
//! `V H_k / H_j` over star-shaped shapes of fixed area and check that the
//! minimizers are centered geodesic spheres.

pub mod optimize;
pub mod probe;

pub use probe::{
    constancy_scan, objective, run_probe, sphere_radius_for_area, ConstancyScan, Feasibility,
    HistoryRow, Method, ObjectiveValue, OptimizerConfig, PenaltyWeights, ProbeConfig, ProbeResult,
    ProbeVerdict, SPHERE_OBJECTIVE, SPHERE_SPREAD,
};
