//! Residual checks of the identities and inequalities between weighted
//! curvature integrals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::minkowski::pointwise_minkowski_residual;
use super::table::FunctionalTable;
use crate::error::{Error, Result};
use crate::surface::{QuadratureGrid, SurfaceGeometry};
use crate::symm::newton_maclaurin_check;

/// Radius or umbilicity spread above which a detected equality is treated
/// as a genuine violation rather than a near-sphere.
pub const NON_SPHERE_SPREAD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance for identities and for declaring equality.
    pub equality: f64,
    /// Relative slack allowed below zero for inequality margins.
    pub strict: f64,
    /// Radius spread below which a shape counts as a centered sphere.
    pub sphere_spread: f64,
    /// Umbilicity spread below which a shape counts as totally umbilical.
    pub umbilic_spread: f64,
    /// Floor for pointwise algebraic margins and the gradient term.
    pub pointwise: f64,
    /// Agreement of the integrated pointwise residual with the integral one.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equality: 1e-8,
            strict: 1e-10,
            sphere_spread: 1e-8,
            umbilic_spread: 1e-8,
            pointwise: 1e-12,
            consistency: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    EqualityDetected,
    HypothesisNotMet,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::EqualityDetected => "equality_detected",
            Verdict::HypothesisNotMet => "hypothesis_not_met",
        }
    }
}

/// One row of a residual report. For inequalities `residual = lhs - rhs` is
/// the margin and should be non-negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    /// Human-readable statement of what is checked.
    pub anchor: String,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    fn new(name: &str, anchor: &str, k: Option<usize>, j: Option<usize>, lhs: f64, rhs: f64) -> Self {
        let residual = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs());
        let relative_residual = if scale > 0.0 { residual / scale } else { 0.0 };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            k,
            j,
            lhs,
            rhs,
            residual,
            relative_residual,
            tolerance: 0.0,
            verdict: Verdict::Pass,
            note: None,
        }
    }

    fn unmet(name: &str, anchor: &str, k: Option<usize>, j: Option<usize>, why: String) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            k,
            j,
            lhs: f64::NAN,
            rhs: f64::NAN,
            residual: f64::NAN,
            relative_residual: f64::NAN,
            tolerance: 0.0,
            verdict: Verdict::HypothesisNotMet,
            note: Some(why),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Equality within `tol` relative.
    fn identity(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.verdict = if self.relative_residual.abs() < tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    /// `lhs >= rhs` up to `strict`; margins under `equality` are labelled.
    fn inequality(mut self, tol: &Tolerances) -> Self {
        self.tolerance = tol.strict;
        self.verdict = if self.relative_residual < -tol.strict {
            Verdict::Fail
        } else if self.relative_residual < tol.equality {
            Verdict::EqualityDetected
        } else {
            Verdict::Pass
        };
        self
    }
}

fn require_k(table: &FunctionalTable, k: usize) -> Result<()> {
    if k == 0 || k > table.k_max {
        return Err(Error::Domain(format!(
            "k = {k} must lie in 1..={} for this table",
            table.k_max
        )));
    }
    Ok(())
}

/// `∫ p H_k dμ = ∫ V H_{k-1} dμ`.
pub fn check_minkowski_integral(table: &FunctionalTable, k: usize, tol: &Tolerances) -> Result<CheckEntry> {
    require_k(table, k)?;
    Ok(CheckEntry::new(
        "minkowski_integral",
        "integral Minkowski identity: int p H_k = int V H_(k-1)",
        Some(k),
        None,
        table.p_h[k],
        table.v_h[k - 1],
    )
    .identity(tol.equality))
}

/// `∫ p V H_k - ∫ V² H_{k-1} = (1/(k C(m,k))) ∫ T_{k-1}(∇V, ∇V)` and, on
/// k-convex shapes, non-negativity of the right-hand side.
pub fn check_weighted_minkowski(
    table: &FunctionalTable,
    k: usize,
    tol: &Tolerances,
) -> Result<Vec<CheckEntry>> {
    require_k(table, k)?;
    let grad = table.gradient_term[k].expect("present for k >= 1");
    let identity = CheckEntry::new(
        "weighted_minkowski",
        "weighted Minkowski identity: int p V H_k = int V^2 H_(k-1) + gradient term",
        Some(k),
        None,
        table.p_v_h[k],
        table.v2_h[k - 1] + grad,
    )
    .identity(tol.equality);
    let positivity_name = "weighted_minkowski_gradient_term";
    let positivity_anchor = "Newton tensor T_(k-1) positive definite: gradient term >= 0";
    let positivity = if table.is_k_convex(k) {
        let mut e = CheckEntry::new(positivity_name, positivity_anchor, Some(k), None, grad, 0.0);
        e.relative_residual = grad;
        e.tolerance = tol.pointwise;
        e.verdict = if grad >= -tol.pointwise {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        e
    } else {
        CheckEntry::unmet(
            positivity_name,
            positivity_anchor,
            Some(k),
            None,
            format!("shape is only {}-convex", table.convexity),
        )
    };
    Ok(vec![identity, positivity])
}

/// `∫ p V H_k dμ >= ∫ V² H_{k-1} dμ` on k-convex shapes, with equality
/// reserved for centered geodesic spheres.
pub fn check_weighted_minkowski_inequality(
    table: &FunctionalTable,
    k: usize,
    tol: &Tolerances,
) -> Result<CheckEntry> {
    require_k(table, k)?;
    let name = "weighted_minkowski_inequality";
    let anchor = "int p V H_k >= int V^2 H_(k-1), equality iff centered geodesic sphere";
    if !table.is_k_convex(k) {
        return Ok(CheckEntry::unmet(
            name,
            anchor,
            Some(k),
            None,
            format!("shape is not {k}-convex (convexity order {})", table.convexity),
        ));
    }
    let e = CheckEntry::new(name, anchor, Some(k), None, table.p_v_h[k], table.v2_h[k - 1])
        .inequality(tol);
    Ok(classify_equality(e, table.radius_spread, tol.sphere_spread, "radius spread"))
}

/// `∫ p dμ <= ∫ V / H_1 dμ` for `H_1 > 0`, with equality reserved for
/// totally umbilical shapes.
pub fn check_heintze_karcher(table: &FunctionalTable, tol: &Tolerances) -> CheckEntry {
    let name = "heintze_karcher";
    let anchor = "int p <= int V / H_1, equality iff totally umbilical";
    let Some(v_over_h1) = table.v_over_h1 else {
        return CheckEntry::unmet(
            name,
            anchor,
            None,
            None,
            format!("mean curvature not positive (min H_1 = {:e})", table.min_h1),
        );
    };
    let e = CheckEntry::new(name, anchor, None, None, v_over_h1, table.p).inequality(tol);
    classify_equality(e, table.umbilicity_spread, tol.umbilic_spread, "umbilicity spread")
}

/// Pairs an inequality verdict with the shape statistic that characterizes
/// its equality case.
fn classify_equality(mut e: CheckEntry, spread: f64, threshold: f64, what: &str) -> CheckEntry {
    match e.verdict {
        Verdict::EqualityDetected if spread >= NON_SPHERE_SPREAD => {
            e.verdict = Verdict::Fail;
            e.note = Some(format!("equality attained with {what} {spread:e}"));
        }
        Verdict::EqualityDetected if spread >= threshold => {
            e.verdict = Verdict::Pass;
            e.note = Some(format!(
                "margin within equality tolerance on a near-sphere ({what} {spread:e})"
            ));
        }
        Verdict::Pass if spread < threshold => {
            e.verdict = Verdict::Fail;
            e.note = Some(format!("strict margin although {what} is {spread:e}"));
        }
        _ => {}
    }
    e
}

/// Sup-norm of the pointwise Minkowski residual and its agreement with the
/// integral identity after quadrature.
pub fn check_minkowski_pointwise(
    geometry: &SurfaceGeometry,
    grid: &QuadratureGrid,
    table: &FunctionalTable,
    k: usize,
    tol: &Tolerances,
) -> Result<Vec<CheckEntry>> {
    require_k(table, k)?;
    let res = pointwise_minkowski_residual(geometry, grid, k)?;
    let scale = geometry
        .samples()
        .iter()
        .map(|s| s.potential * s.principal.normalized_all(k).map(|h| h[k - 1].abs()).unwrap_or(0.0))
        .fold(0.0f64, f64::max)
        * (geometry.dim() - k) as f64
        * crate::symm::binomial(geometry.surface_dim(), k - 1);
    let mut sup = CheckEntry::new(
        "minkowski_pointwise",
        "div(T_(k-1) grad V) = -k p sigma_k + (n-k) V sigma_(k-1) at every node",
        Some(k),
        None,
        res.sup,
        0.0,
    );
    sup.relative_residual = if scale > 0.0 { res.sup / scale } else { res.sup };
    let sup = sup.identity(tol.equality);

    let integral_residual = table.p_h[k] - table.v_h[k - 1];
    let mut consistency = CheckEntry::new(
        "minkowski_pointwise_integrated",
        "quadrature of the pointwise residual equals the integral identity residual",
        Some(k),
        None,
        res.integrated_normalized,
        integral_residual,
    );
    consistency.relative_residual = consistency.residual / table.p_h[k].abs().max(1.0);
    Ok(vec![sup, consistency.identity(tol.consistency)])
}

/// Node scan of `H_j >= H_k^{j/k}` for every pair `1 <= j < k` allowed by
/// the shape's convexity order. Reports the smallest margin relative to `H_j`.
pub fn check_newton_maclaurin_scan(
    geometry: &SurfaceGeometry,
    convexity: usize,
    tol: &Tolerances,
) -> Result<CheckEntry> {
    let name = "newton_maclaurin_scan";
    let anchor = "H_j >= H_k^(j/k) on the Garding cone, every node and pair j < k";
    if geometry.surface_dim() < 2 {
        let mut e = CheckEntry::new(name, anchor, None, None, 0.0, 0.0);
        e.tolerance = tol.pointwise;
        return Ok(e.with_note("no index pairs for curves"));
    }
    if convexity < 2 {
        return Ok(CheckEntry::unmet(
            name,
            anchor,
            None,
            None,
            format!("shape is only {convexity}-convex"),
        ));
    }
    let mut worst = f64::INFINITY;
    let mut at = (0, 0);
    for s in geometry.samples() {
        let h = s.principal.normalized_all(convexity)?;
        for k in 2..=convexity {
            for j in 1..k {
                let rel = newton_maclaurin_check(&s.principal, j, k)? / h[j];
                if rel < worst {
                    worst = rel;
                    at = (j, k);
                }
            }
        }
    }
    let mut e = CheckEntry::new(name, anchor, Some(at.1), Some(at.0), worst, 0.0);
    e.relative_residual = worst;
    e.tolerance = tol.pointwise;
    e.verdict = if worst < -tol.pointwise {
        Verdict::Fail
    } else if worst < tol.equality {
        Verdict::EqualityDetected
    } else {
        Verdict::Pass
    };
    Ok(e)
}

/// Links of the argument that forces constancy of `V H_k` (or of
/// `V H_k / H_j`) to produce a geodesic sphere, evaluated on a general shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub entries: Vec<CheckEntry>,
    pub diagnostics: BTreeMap<String, f64>,
    /// Every link attained equality at once.
    pub squeeze_closed: bool,
}

struct Extremes {
    min: f64,
    max: f64,
    mean: f64,
}

impl Extremes {
    fn of(values: &[f64], weights: &[f64]) -> Self {
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let total: f64 = weights.iter().sum();
        let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
        Self { min, max, mean }
    }

    fn defect(&self) -> f64 {
        (self.max - self.min) / self.mean.abs()
    }
}

/// Both proof chains. For `j = 0` the quantity is `Q = V H_k`:
///
/// `max Q ∫p >= ∫pVH_k >= ∫V²H_{k-1} >= ∫V^{1+1/k} Q^{(k-1)/k} >= (min Q)^{(k-1)/k} ∫V^{1+1/k}`
///
/// `∫p <= ∫V/H_1 <= ∫V H_k^{-1/k} <= (min Q)^{-1/k} ∫V^{1+1/k}`
///
/// For `j >= 1`, with `Q = V H_k / H_j` ranging over `[α_min, α_max]`, the
/// ratio chain `V H_{k-1}/H_{j-1} >= α_min` and
/// `α_max ∫V H_{j-1} >= ∫V² H_{k-1} >= α_min ∫V H_{j-1}` is evaluated and the
/// constancy defects of `V H_{k-i}/H_{j-i}` are reported for every step of
/// the iteration.
pub fn check_theorem_chains(
    table: &FunctionalTable,
    geometry: &SurfaceGeometry,
    k: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<ChainReport> {
    require_k(table, k)?;
    if j >= k {
        return Err(Error::Domain(format!("need j < k, got j = {j}, k = {k}")));
    }
    if !table.is_k_convex(k) {
        let why = format!("shape is not {k}-convex (convexity order {})", table.convexity);
        return Ok(ChainReport {
            entries: vec![CheckEntry::unmet("chain", "constancy chain", Some(k), Some(j), why)],
            diagnostics: BTreeMap::new(),
            squeeze_closed: false,
        });
    }
    if j == 0 {
        constant_product_chain(table, geometry, k, tol)
    } else {
        ratio_chain(table, geometry, k, j, tol)
    }
}

fn constant_product_chain(
    table: &FunctionalTable,
    geometry: &SurfaceGeometry,
    k: usize,
    tol: &Tolerances,
) -> Result<ChainReport> {
    let samples = geometry.samples();
    let kf = k as f64;
    let h: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| s.principal.normalized_all(k))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = samples.iter().map(|s| s.area_weight).collect();
    let q: Vec<f64> = samples.iter().zip(&h).map(|(s, h)| s.potential * h[k]).collect();
    let ext = Extremes::of(&q, &weights);
    let v_pow = table.v_pow[k].expect("present for k >= 1");
    let v_over_h1 = table.v_over_h1.expect("k-convex implies H_1 > 0");

    let nm_pointwise = h
        .iter()
        .map(|h| (h[k - 1] - h[k].powf((kf - 1.0) / kf)) / h[k - 1])
        .fold(f64::INFINITY, f64::min);
    let v2_hk_pow = geometry
        .samples()
        .iter()
        .zip(&h)
        .map(|(s, h)| s.potential.powi(2) * h[k].powf((kf - 1.0) / kf) * s.area_weight)
        .sum::<f64>();
    let v_hk_root = geometry
        .samples()
        .iter()
        .zip(&h)
        .map(|(s, h)| s.potential * h[k].powf(-1.0 / kf) * s.area_weight)
        .sum::<f64>();
    let lower_bound = ext.min.powf((kf - 1.0) / kf) / ext.max * v_pow;
    let upper_bound = ext.min.powf(-1.0 / kf) * v_pow;

    let kk = Some(k);
    let mut pointwise = CheckEntry::new(
        "chain_newton_maclaurin_pointwise",
        "H_(k-1) >= H_k^((k-1)/k) at every node",
        kk,
        Some(0),
        nm_pointwise,
        0.0,
    );
    pointwise.relative_residual = nm_pointwise;
    let entries = vec![
        CheckEntry::new(
            "chain_weighted_minkowski",
            "int p V H_k >= int V^2 H_(k-1)",
            kk,
            Some(0),
            table.p_v_h[k],
            table.v2_h[k - 1],
        )
        .inequality(tol),
        pointwise.inequality(tol),
        CheckEntry::new(
            "chain_newton_maclaurin_integral",
            "int V^2 H_(k-1) >= int V^2 H_k^((k-1)/k)",
            kk,
            Some(0),
            table.v2_h[k - 1],
            v2_hk_pow,
        )
        .inequality(tol),
        CheckEntry::new(
            "chain_lower_bound",
            "int p >= (min VH_k)^((k-1)/k) / max VH_k * int V^(1+1/k)",
            kk,
            Some(0),
            table.p,
            lower_bound,
        )
        .inequality(tol),
        CheckEntry::new(
            "chain_heintze_karcher",
            "int V / H_1 >= int p",
            kk,
            Some(0),
            v_over_h1,
            table.p,
        )
        .inequality(tol),
        CheckEntry::new(
            "chain_newton_maclaurin_upper",
            "int V H_k^(-1/k) >= int V / H_1",
            kk,
            Some(0),
            v_hk_root,
            v_over_h1,
        )
        .inequality(tol),
        CheckEntry::new(
            "chain_upper_bound",
            "(min VH_k)^(-1/k) * int V^(1+1/k) >= int V H_k^(-1/k)",
            kk,
            Some(0),
            upper_bound,
            v_hk_root,
        )
        .inequality(tol),
    ];
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("q_min".into(), ext.min);
    diagnostics.insert("q_max".into(), ext.max);
    diagnostics.insert("q_mean".into(), ext.mean);
    diagnostics.insert("constancy_defect".into(), ext.defect());
    diagnostics.insert("lower_bound".into(), lower_bound);
    diagnostics.insert("upper_bound".into(), upper_bound);
    Ok(close_squeeze(entries, diagnostics, table, tol, k, 0, upper_bound, lower_bound))
}

fn ratio_chain(
    table: &FunctionalTable,
    geometry: &SurfaceGeometry,
    k: usize,
    j: usize,
    tol: &Tolerances,
) -> Result<ChainReport> {
    let samples = geometry.samples();
    let h: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| s.principal.normalized_all(k))
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = samples.iter().map(|s| s.area_weight).collect();
    let ratio = |top: usize, bottom: usize| -> Vec<f64> {
        samples
            .iter()
            .zip(&h)
            .map(|(s, h)| s.potential * h[top] / h[bottom])
            .collect()
    };
    let q = ratio(k, j);
    let ext = Extremes::of(&q, &weights);
    let shifted = ratio(k - 1, j - 1);
    let shifted_min = shifted.iter().copied().fold(f64::INFINITY, f64::min);
    let nm_ratio = h
        .iter()
        .map(|h| (h[j] * h[k - 1] - h[k] * h[j - 1]) / (h[j] * h[k - 1]))
        .fold(f64::INFINITY, f64::min);

    let (kk, jj) = (Some(k), Some(j));
    let mut pointwise = CheckEntry::new(
        "ratio_newton_maclaurin_pointwise",
        "H_k / H_(k-1) <= H_j / H_(j-1) at every node",
        kk,
        jj,
        nm_ratio,
        0.0,
    );
    pointwise.relative_residual = nm_ratio;
    let upper = ext.max * table.v_h[j - 1];
    let lower = ext.min * table.v_h[j - 1];
    let entries = vec![
        pointwise.inequality(tol),
        CheckEntry::new(
            "ratio_shifted_lower",
            "min V H_(k-1)/H_(j-1) >= min V H_k/H_j",
            kk,
            jj,
            shifted_min,
            ext.min,
        )
        .inequality(tol),
        CheckEntry::new(
            "ratio_weighted_minkowski",
            "int p V H_k >= int V^2 H_(k-1)",
            kk,
            jj,
            table.p_v_h[k],
            table.v2_h[k - 1],
        )
        .inequality(tol),
        CheckEntry::new(
            "ratio_alpha_bound",
            "max(V H_k/H_j) * int p H_j >= int p V H_k",
            kk,
            jj,
            ext.max * table.p_h[j],
            table.p_v_h[k],
        )
        .inequality(tol),
        CheckEntry::new(
            "ratio_integral_upper",
            "max(V H_k/H_j) * int V H_(j-1) >= int V^2 H_(k-1)",
            kk,
            jj,
            upper,
            table.v2_h[k - 1],
        )
        .inequality(tol),
        CheckEntry::new(
            "ratio_integral_lower",
            "int V^2 H_(k-1) >= min(V H_k/H_j) * int V H_(j-1)",
            kk,
            jj,
            table.v2_h[k - 1],
            lower,
        )
        .inequality(tol),
    ];
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("q_min".into(), ext.min);
    diagnostics.insert("q_max".into(), ext.max);
    diagnostics.insert("q_mean".into(), ext.mean);
    diagnostics.insert("constancy_defect".into(), ext.defect());
    for i in 1..=j {
        let step = Extremes::of(&ratio(k - i, j - i), &weights);
        diagnostics.insert(format!("iteration_defect_{i}"), step.defect());
    }
    Ok(close_squeeze(entries, diagnostics, table, tol, k, j, upper, lower))
}

#[allow(clippy::too_many_arguments)]
fn close_squeeze(
    mut entries: Vec<CheckEntry>,
    diagnostics: BTreeMap<String, f64>,
    table: &FunctionalTable,
    tol: &Tolerances,
    k: usize,
    j: usize,
    upper: f64,
    lower: f64,
) -> ChainReport {
    let squeeze_closed = entries
        .iter()
        .all(|e| e.verdict == Verdict::EqualityDetected);
    let squeeze = CheckEntry::new(
        "chain_squeeze",
        "upper and lower bounds coincide only on centered geodesic spheres",
        Some(k),
        Some(j),
        upper,
        lower,
    )
    .inequality(tol);
    entries.push(classify_equality(
        squeeze,
        table.radius_spread,
        tol.sphere_spread,
        "radius spread",
    ));
    ChainReport {
        entries,
        diagnostics,
        squeeze_closed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::SphereSpec;
    use crate::functionals::evaluate_functionals;
    use crate::surface::{build_geometry, RadialShape};

    fn setup(shape: &RadialShape, res: usize) -> (SurfaceGeometry, QuadratureGrid, FunctionalTable) {
        let grid = QuadratureGrid::for_resolution(shape.dim(), res).unwrap();
        let geo = build_geometry(shape, &grid).unwrap();
        let table = evaluate_functionals(&geo, shape.surface_dim()).unwrap();
        (geo, grid, table)
    }

    #[test]
    fn centered_sphere_saturates_everything() {
        let tol = Tolerances::default();
        let shape = RadialShape::centered_sphere(3, 1.0).unwrap();
        let (geo, grid, t) = setup(&shape, 8);
        for k in 1..=2 {
            assert_eq!(check_minkowski_integral(&t, k, &tol).unwrap().verdict, Verdict::Pass);
            for e in check_weighted_minkowski(&t, k, &tol).unwrap() {
                assert_eq!(e.verdict, Verdict::Pass, "{e:?}");
            }
            let e = check_weighted_minkowski_inequality(&t, k, &tol).unwrap();
            assert_eq!(e.verdict, Verdict::EqualityDetected);
            for e in check_minkowski_pointwise(&geo, &grid, &t, k, &tol).unwrap() {
                assert_eq!(e.verdict, Verdict::Pass, "{e:?}");
            }
        }
        assert_eq!(check_heintze_karcher(&t, &tol).verdict, Verdict::EqualityDetected);
        for j in 0..2 {
            let chain = check_theorem_chains(&t, &geo, 2, j, &tol).unwrap();
            assert!(chain.squeeze_closed, "{chain:?}");
            assert_eq!(chain.entries.last().unwrap().verdict, Verdict::EqualityDetected);
        }
    }

    #[test]
    fn off_center_sphere_discriminates_the_equality_cases() {
        let tol = Tolerances::default();
        for dim in [2usize, 3] {
            let spec = SphereSpec {
                center_distance: 0.3,
                center_direction: if dim == 2 { vec![1.0, 0.0] } else { vec![0.0, 0.6, 0.8] },
                radius: 1.0,
            };
            let l = if dim == 2 { 40 } else { 20 };
            let shape = RadialShape::sphere(dim, &spec, l).unwrap();
            let (_, _, t) = setup(&shape, 2 * l + 2);
            let hk = check_heintze_karcher(&t, &tol);
            assert_eq!(hk.verdict, Verdict::EqualityDetected, "dim {dim}: {hk:?}");
            let wm = check_weighted_minkowski_inequality(&t, dim - 1, &tol).unwrap();
            assert_eq!(wm.verdict, Verdict::Pass, "dim {dim}: {wm:?}");
            assert!(wm.relative_residual > 1e-4);
        }
    }

    #[test]
    fn surface_identity_already_holds_on_the_coarsest_grid() {
        let shape = RadialShape::perturb_sphere(3, 1.0, 0.1, 7, 4).unwrap();
        let (_, _, t) = setup(&shape, 10);
        for k in 1..=2 {
            let e = check_minkowski_integral(&t, k, &Tolerances::default()).unwrap();
            assert!(e.relative_residual.abs() < 1e-8, "{e:?}");
            assert_eq!(e.verdict, Verdict::Pass);
        }
    }

    #[test]
    fn perturbed_sphere_has_strict_margins() {
        let tol = Tolerances::default();
        for dim in [2usize, 3] {
            let shape = RadialShape::perturb_sphere(dim, 1.0, 0.1, 7, 4).unwrap();
            let (geo, _, t) = setup(&shape, 24);
            for k in 1..dim {
                let e = check_weighted_minkowski_inequality(&t, k, &tol).unwrap();
                assert_eq!(e.verdict, Verdict::Pass);
                assert!(e.residual > 0.0);
                let chain = check_theorem_chains(&t, &geo, k, 0, &tol).unwrap();
                assert!(!chain.squeeze_closed);
                assert!(chain.diagnostics["constancy_defect"] > 0.01);
                assert!(chain.entries.iter().all(|e| !e.verdict.is_fail()), "{chain:?}");
            }
            assert_eq!(check_heintze_karcher(&t, &tol).verdict, Verdict::Pass);
        }
    }

    #[test]
    fn ratio_chain_on_surfaces() {
        let tol = Tolerances::default();
        let shape = RadialShape::perturb_sphere(3, 1.0, 0.1, 3, 4).unwrap();
        let (geo, _, t) = setup(&shape, 24);
        let chain = check_theorem_chains(&t, &geo, 2, 1, &tol).unwrap();
        assert!(chain.entries.iter().all(|e| !e.verdict.is_fail()), "{chain:?}");
        assert!(chain.diagnostics.contains_key("iteration_defect_1"));
        let sphere = RadialShape::centered_sphere(3, 0.7).unwrap();
        let (geo, _, t) = setup(&sphere, 8);
        let chain = check_theorem_chains(&t, &geo, 2, 1, &tol).unwrap();
        assert!(chain.squeeze_closed);
        assert!(chain.diagnostics["iteration_defect_1"] < 1e-12);
    }

    #[test]
    fn unmet_hypotheses_are_reported_not_skipped() {
        let tol = Tolerances::default();
        // a curve with inward dents has negative curvature somewhere
        let mut coeffs = vec![0.0; 11];
        coeffs[0] = 1.0;
        coeffs[9] = 0.25;
        let shape = RadialShape::new(2, 5, coeffs).unwrap();
        let (geo, _, t) = setup(&shape, 96);
        assert_eq!(t.convexity, 0);
        assert_eq!(check_heintze_karcher(&t, &tol).verdict, Verdict::HypothesisNotMet);
        let e = check_weighted_minkowski_inequality(&t, 1, &tol).unwrap();
        assert_eq!(e.verdict, Verdict::HypothesisNotMet);
        let chain = check_theorem_chains(&t, &geo, 1, 0, &tol).unwrap();
        assert_eq!(chain.entries[0].verdict, Verdict::HypothesisNotMet);
        // identities hold regardless of convexity
        let e = check_minkowski_integral(&t, 1, &tol).unwrap();
        assert_eq!(e.verdict, Verdict::Pass, "{e:?}");
    }
}
