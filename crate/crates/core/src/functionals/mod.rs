//! Weighted curvature integrals and the residual suite built on them.

pub mod checks;
pub mod minkowski;
pub mod report;
pub mod table;

pub use checks::{
    check_heintze_karcher, check_minkowski_integral, check_minkowski_pointwise,
    check_newton_maclaurin_scan, check_theorem_chains, check_weighted_minkowski,
    check_weighted_minkowski_inequality, ChainReport, CheckEntry, Tolerances, Verdict,
};
pub use minkowski::{pointwise_minkowski_residual, PointwiseResidual};
pub use report::ResidualReport;
pub use table::{convexity_order, evaluate_functionals, FunctionalTable};
