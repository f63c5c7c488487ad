use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::optimize::{gradient_descent, nelder_mead, Settings};
use crate::ambient::RADIUS_CAP;
use crate::error::{Error, Result};
use crate::functionals::convexity_order;
use crate::functionals::report::fmt_float;
use crate::surface::basis::{basis_len, jet_at, BasisJet};
use crate::surface::{geometry_from_jets, QuadratureGrid, RadialJet, RadialShape, ShapeFile, SurfaceGeometry};

/// Objective value assigned to candidates whose geometry cannot be built.
pub const INFEASIBLE: f64 = 1e6;
/// `H_i` below this at any node is penalized.
const CONE_MARGIN: f64 = 1e-3;
/// `r` below this at any node is penalized.
const RADIUS_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    NelderMead,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_evaluations: usize,
    /// Stop once the objective falls below this.
    pub objective_tolerance: f64,
    /// Simplex edge as a fraction of `√J` at the start (scaled coordinates),
    /// or the finite-difference step for the gradient method.
    pub initial_step: f64,
    /// Rescale each coefficient by the root of a probed diagonal curvature.
    pub scale_variables: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_evaluations: 10_000,
            objective_tolerance: 1e-12,
            initial_step: 0.5,
            scale_variables: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyWeights {
    /// Quadratic hinge on `min r` below a small floor.
    pub positivity: f64,
    /// Quadratic hinge on `min_q H_i` for `i <= k`.
    pub cone: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self {
            positivity: 1e3,
            cone: 1e3,
        }
    }
}

/// Search for shapes of fixed area on which `V H_k / H_j` is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub dimension: usize,
    pub k: usize,
    #[serde(default)]
    pub j: usize,
    pub band_limit: usize,
    /// Grid resolution; defaults to `4L + 4`.
    #[serde(default)]
    pub resolution: Option<usize>,
    pub initial: ShapeFile,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub penalties: PenaltyWeights,
}

impl ProbeConfig {
    pub fn new(initial: &RadialShape, k: usize, j: usize) -> Self {
        Self {
            dimension: initial.dim(),
            k,
            j,
            band_limit: initial.band_limit(),
            resolution: None,
            initial: initial.to_file("probe initial shape"),
            optimizer: OptimizerConfig::default(),
            penalties: PenaltyWeights::default(),
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution.unwrap_or(4 * self.band_limit + 4)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dimension.saturating_sub(1);
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        if !(self.j < self.k && self.k <= m) {
            return Err(Error::Config(format!(
                "indices must satisfy 0 <= j < k <= {m}, got j = {}, k = {}",
                self.j, self.k
            )));
        }
        if self.initial.dimension != self.dimension {
            return Err(Error::Config("initial shape dimension differs from probe dimension".into()));
        }
        if self.initial.band_limit > self.band_limit {
            return Err(Error::Config(format!(
                "initial shape band limit {} exceeds probe band limit {}",
                self.initial.band_limit, self.band_limit
            )));
        }
        if self.resolution() < 2 * self.band_limit + 2 {
            return Err(Error::Config(format!(
                "resolution {} is below 2L + 2 = {}",
                self.resolution(),
                2 * self.band_limit + 2
            )));
        }
        if self.optimizer.max_evaluations == 0 || !(self.optimizer.initial_step > 0.0) {
            return Err(Error::Config("optimizer needs a positive budget and step".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    SphereReached,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub star_shaped: bool,
    /// Curvature tuple in `Γ_k` at every node.
    pub cone: bool,
    pub hj_positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub evaluations: usize,
    pub objective: f64,
    pub radius_spread: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub verdict: ProbeVerdict,
    pub k: usize,
    pub j: usize,
    pub final_shape: ShapeFile,
    /// Variance plus penalties at the optimum.
    pub final_objective: f64,
    pub variance: f64,
    pub penalty: f64,
    pub mean_radius: f64,
    /// `std(r) / r̄` over the round measure.
    pub radius_spread: f64,
    /// `(max Q - min Q) / mean Q`.
    pub constancy_defect: f64,
    pub q_mean: f64,
    /// `cosh ρ* coth^{k-j} ρ*` for the centered sphere of the target area.
    pub expected_q_mean: f64,
    pub area_target: f64,
    pub area: f64,
    pub area_error: f64,
    pub feasibility: Feasibility,
    pub iterations: usize,
    pub evaluations: usize,
    pub history: Vec<HistoryRow>,
    /// Excluded from serialized output so results are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ProbeResult {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,evaluations,objective,radius_spread,defect\n");
        for h in &self.history {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                h.iteration,
                h.evaluations,
                fmt_float(h.objective),
                fmt_float(h.radius_spread),
                fmt_float(h.defect)
            );
        }
        out
    }
}

/// Value of the probe objective on one shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub total: f64,
    /// `(1/A) ∫ (Q - Q̄)² dμ`
    pub variance: f64,
    pub penalty: f64,
    pub q_mean: f64,
    pub defect: f64,
    pub area: f64,
}

fn score(geometry: &SurfaceGeometry, k: usize, j: usize, penalties: &PenaltyWeights) -> ObjectiveValue {
    let samples = geometry.samples();
    let mut q = Vec::with_capacity(samples.len());
    let mut cone_gap = 0.0f64;
    let mut min_r = f64::INFINITY;
    for s in samples {
        let h = s.principal.normalized_all(k).expect("k <= m");
        q.push(s.potential * h[k] / h[j]);
        for hi in &h[1..] {
            cone_gap = cone_gap.max(CONE_MARGIN - hi);
        }
        min_r = min_r.min(s.jet.r);
    }
    let area = geometry.area();
    let q_mean = samples.iter().zip(&q).map(|(s, q)| q * s.area_weight).sum::<f64>() / area;
    let variance = samples
        .iter()
        .zip(&q)
        .map(|(s, q)| (q - q_mean).powi(2) * s.area_weight)
        .sum::<f64>()
        / area;
    let (lo, hi) = q
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let penalty = penalties.cone * cone_gap.max(0.0).powi(2)
        + penalties.positivity * (RADIUS_FLOOR - min_r).max(0.0).powi(2);
    let variance = if variance.is_finite() { variance } else { INFEASIBLE };
    ObjectiveValue {
        total: variance + penalty,
        variance,
        penalty,
        q_mean,
        defect: (hi - lo) / q_mean.abs(),
        area,
    }
}

/// `J = (1/A) ∫ (Q - Q̄)² dμ + penalties` with `Q = V H_k / H_j`, evaluated
/// on `shape` as given. Shapes whose geometry cannot be built score
/// [`INFEASIBLE`].
pub fn objective(
    shape: &RadialShape,
    grid: &QuadratureGrid,
    k: usize,
    j: usize,
    penalties: &PenaltyWeights,
) -> Result<ObjectiveValue> {
    let m = shape.surface_dim();
    if !(j < k && k <= m) {
        return Err(Error::Domain(format!("need 0 <= j < k <= {m}, got j = {j}, k = {k}")));
    }
    Ok(match crate::surface::build_geometry(shape, grid) {
        Ok(g) => score(&g, k, j, penalties),
        Err(Error::Config(msg)) => return Err(Error::Config(msg)),
        Err(_) => ObjectiveValue {
            total: INFEASIBLE,
            variance: f64::NAN,
            penalty: INFEASIBLE,
            q_mean: f64::NAN,
            defect: f64::NAN,
            area: f64::NAN,
        },
    })
}

/// Extremes of `Q = V H_k / H_j` over the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstancyScan {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `(max - min) / mean`
    pub defect: f64,
    pub hk_positive: bool,
    /// False when `H_j` vanishes or changes sign somewhere (`j >= 1`).
    pub hj_positive: bool,
    /// Curvature tuple in `Γ_k` at every node.
    pub cone: bool,
    /// Nodes where `Q` is undefined because `H_j = 0`.
    pub undefined_nodes: usize,
}

pub fn constancy_scan(geometry: &SurfaceGeometry, k: usize, j: usize) -> Result<ConstancyScan> {
    let m = geometry.surface_dim();
    if !(j < k && k <= m) {
        return Err(Error::Domain(format!("need 0 <= j < k <= {m}, got j = {j}, k = {k}")));
    }
    let mut values = Vec::new();
    let mut weights = Vec::new();
    let (mut hk_pos, mut hj_pos, mut undefined) = (true, true, 0);
    for s in geometry.samples() {
        let h = s.principal.normalized_all(k)?;
        hk_pos &= h[k] > 0.0;
        hj_pos &= h[j] > 0.0;
        if h[j] == 0.0 {
            undefined += 1;
            continue;
        }
        values.push(s.potential * h[k] / h[j]);
        weights.push(s.area_weight);
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / weights.iter().sum::<f64>();
    Ok(ConstancyScan {
        mean,
        min,
        max,
        defect: (max - min) / mean.abs(),
        hk_positive: hk_pos,
        hj_positive: hj_pos,
        cone: convexity_order(geometry) >= k,
        undefined_nodes: undefined,
    })
}

/// Radius of the centered sphere with the given area.
pub fn sphere_radius_for_area(dim: usize, area: f64) -> f64 {
    let m = (dim - 1) as i32;
    let unit = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
    (area / unit).powf(1.0 / m as f64).asinh()
}

#[derive(Debug, Clone)]
struct Stats {
    value: ObjectiveValue,
    radius_spread: f64,
    mean_radius: f64,
    c0: f64,
}

/// Coefficient space with the constant mode eliminated by the area
/// constraint.
struct Problem<'a> {
    dim: usize,
    k: usize,
    j: usize,
    grid: &'a QuadratureGrid,
    basis: Vec<BasisJet>,
    base: Vec<f64>,
    scale: Vec<f64>,
    area0: f64,
    c0_guess: f64,
    penalties: PenaltyWeights,
}

impl Problem<'_> {
    fn coeffs(&self, y: &[f64]) -> Vec<f64> {
        let mut c = self.base.clone();
        c[0] = 0.0;
        for (i, v) in y.iter().enumerate() {
            c[i + 1] += v / self.scale[i];
        }
        c
    }

    fn jets(&self, c: &[f64]) -> Vec<RadialJet> {
        let dot = |v: &[f64]| v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        self.basis
            .iter()
            .map(|b| RadialJet {
                r: dot(&b.value),
                d: [dot(&b.first[0]), dot(&b.first[1])],
                dd: [dot(&b.second[0]), dot(&b.second[1]), dot(&b.second[2])],
            })
            .collect()
    }

    /// Area of `rest + c0` and its derivative in `c0`.
    fn area(&self, rest: &[RadialJet], c0: f64) -> (f64, f64) {
        let m = (self.dim - 1) as i32;
        let (mut a, mut da) = (0.0, 0.0);
        for (jet, node) in rest.iter().zip(self.grid.nodes()) {
            let r = jet.r + c0;
            let (s, c) = (r.sinh(), r.cosh());
            let grad_sq = match self.dim {
                2 => jet.d[0] * jet.d[0],
                _ => jet.d[0] * jet.d[0] + (jet.d[1] / node.angles[0].sin()).powi(2),
            };
            let f = (s.powi(2 * m) + s.powi(2 * m - 2) * grad_sq).sqrt();
            let mf = m as f64;
            let df = (2.0 * mf * s.powi(2 * m - 1) + (2.0 * mf - 2.0) * s.powi(2 * m - 3) * grad_sq) * c
                / (2.0 * f);
            a += node.weight * f;
            da += node.weight * df;
        }
        (a, da)
    }

    /// Constant coefficient giving area `area0`, by safeguarded Newton.
    fn solve_c0(&self, rest: &[RadialJet]) -> Option<f64> {
        let (lo_r, hi_r) = rest
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| (lo.min(j.r), hi.max(j.r)));
        let (mut lo, mut hi) = (-lo_r, RADIUS_CAP - hi_r);
        if !(lo < hi) || self.area(rest, hi).0 < self.area0 {
            return None;
        }
        let mut c = self.c0_guess.clamp(lo, hi);
        for _ in 0..100 {
            let (a, da) = self.area(rest, c);
            let f = a - self.area0;
            if f.abs() <= 1e-14 * self.area0 {
                return Some(c);
            }
            if f > 0.0 {
                hi = c;
            } else {
                lo = c;
            }
            let newton = c - f / da;
            c = if da > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 * (1.0 + c.abs()) {
                return Some(c);
            }
        }
        Some(c)
    }

    fn evaluate(&self, y: &[f64]) -> (f64, Stats) {
        let infeasible = |c0| {
            (
                INFEASIBLE,
                Stats {
                    value: ObjectiveValue {
                        total: INFEASIBLE,
                        variance: f64::NAN,
                        penalty: INFEASIBLE,
                        q_mean: f64::NAN,
                        defect: f64::NAN,
                        area: f64::NAN,
                    },
                    radius_spread: f64::NAN,
                    mean_radius: f64::NAN,
                    c0,
                },
            )
        };
        let c = self.coeffs(y);
        let mut jets = self.jets(&c);
        let Some(c0) = self.solve_c0(&jets) else {
            return infeasible(f64::NAN);
        };
        jets.iter_mut().for_each(|j| j.r += c0);
        let geometry = match geometry_from_jets(self.dim, self.grid, &jets) {
            Ok(g) => g,
            Err(_) => return infeasible(c0),
        };
        let value = score(&geometry, self.k, self.j, &self.penalties);
        let (mean_radius, radius_spread) = radius_statistics(self.grid, &jets);
        (
            value.total,
            Stats {
                value,
                radius_spread,
                mean_radius,
                c0,
            },
        )
    }
}

fn radius_statistics(grid: &QuadratureGrid, jets: &[RadialJet]) -> (f64, f64) {
    let total: f64 = grid.nodes().iter().map(|n| n.weight).sum();
    let mean = grid.nodes().iter().zip(jets).map(|(n, j)| n.weight * j.r).sum::<f64>() / total;
    let var = grid
        .nodes()
        .iter()
        .zip(jets)
        .map(|(n, j)| n.weight * (j.r - mean).powi(2))
        .sum::<f64>()
        / total;
    (mean, var.sqrt() / mean)
}

/// Verdict thresholds.
pub const SPHERE_SPREAD: f64 = 1e-3;
pub const SPHERE_OBJECTIVE: f64 = 1e-8;

/// Minimizes `J` over shapes of the initial shape's area.
pub fn run_probe(config: &ProbeConfig) -> Result<ProbeResult> {
    let started = Instant::now();
    config.validate()?;
    let (k, j, dim) = (config.k, config.j, config.dimension);
    let initial = RadialShape::from_file(&config.initial)?.with_band_limit(config.band_limit)?;
    let grid = QuadratureGrid::for_resolution(dim, config.resolution())?;
    let start_geometry = crate::surface::build_geometry(&initial, &grid)?;
    let scan = constancy_scan(&start_geometry, k, j)?;
    if !scan.cone {
        return Err(Error::Precondition(format!(
            "initial shape is not {k}-convex at every node"
        )));
    }
    let area0 = start_geometry.area();

    let basis: Vec<BasisJet> = grid
        .nodes()
        .iter()
        .map(|n| jet_at(dim, config.band_limit, n.angles))
        .collect();
    let nb = basis_len(dim, config.band_limit);
    let mut problem = Problem {
        dim,
        k,
        j,
        grid: &grid,
        basis,
        base: initial.coeffs().to_vec(),
        scale: vec![1.0; nb - 1],
        area0,
        c0_guess: initial.coeffs()[0],
        penalties: config.penalties,
    };
    let zero = vec![0.0; nb - 1];
    let (j0, _) = problem.evaluate(&zero);

    if config.optimizer.scale_variables && nb > 1 && j0 > 0.0 {
        let eps = 1e-3 * problem.c0_guess.abs().max(0.1);
        let curvatures: Vec<f64> = {
            use rayon::prelude::*;
            (0..nb - 1)
                .into_par_iter()
                .map(|i| {
                    let mut plus = zero.clone();
                    plus[i] = eps;
                    let mut minus = zero.clone();
                    minus[i] = -eps;
                    (problem.evaluate(&plus).0 + problem.evaluate(&minus).0 - 2.0 * j0) / (eps * eps)
                })
                .collect()
        };
        let mut positive: Vec<f64> = curvatures.iter().copied().filter(|c| *c > 0.0 && *c < INFEASIBLE).collect();
        positive.sort_by(f64::total_cmp);
        let fallback = positive.get(positive.len() / 2).copied().unwrap_or(1.0);
        problem.scale = curvatures
            .iter()
            .map(|&c| if c > 1e-3 * fallback && c < INFEASIBLE { c.sqrt() } else { fallback.sqrt() })
            .collect();
    }

    let settings = Settings {
        max_evaluations: config.optimizer.max_evaluations,
        target: config.optimizer.objective_tolerance,
        step: match config.optimizer.method {
            Method::NelderMead => config.optimizer.initial_step * j0.max(1e-20).sqrt(),
            Method::Gradient => config.optimizer.initial_step.min(1e-4) * 1e-2,
        },
    };
    let f = |y: &[f64]| problem.evaluate(y);
    let (outcome, trace) = match config.optimizer.method {
        Method::NelderMead => nelder_mead(&f, &zero, &settings),
        Method::Gradient => gradient_descent(&f, &zero, &settings),
    };

    let mut coeffs = problem.coeffs(&outcome.x);
    coeffs[0] = outcome.payload.c0;
    let final_shape = RadialShape::new(dim, config.band_limit, coeffs)?;
    let final_geometry = crate::surface::build_geometry(&final_shape, &grid)?;
    let final_scan = constancy_scan(&final_geometry, k, j)?;
    let stats = outcome.payload;
    let rho_star = sphere_radius_for_area(dim, area0);
    let expected_q_mean = rho_star.cosh() / rho_star.tanh().powi((k - j) as i32);
    let verdict = if stats.radius_spread < SPHERE_SPREAD && outcome.value < SPHERE_OBJECTIVE {
        ProbeVerdict::SphereReached
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(ProbeResult {
        verdict,
        k,
        j,
        final_shape: final_shape.to_file(format!("probe optimum, k = {k}, j = {j}")),
        final_objective: outcome.value,
        variance: stats.value.variance,
        penalty: stats.value.penalty,
        mean_radius: stats.mean_radius,
        radius_spread: stats.radius_spread,
        constancy_defect: final_scan.defect,
        q_mean: stats.value.q_mean,
        expected_q_mean,
        area_target: area0,
        area: final_geometry.area(),
        area_error: (final_geometry.area() - area0).abs() / area0,
        feasibility: Feasibility {
            star_shaped: true,
            cone: final_scan.cone,
            hj_positive: final_scan.hj_positive,
        },
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        history: trace
            .into_iter()
            .map(|(iteration, evaluations, objective, s)| HistoryRow {
                iteration,
                evaluations,
                objective,
                radius_spread: s.radius_spread,
                defect: s.value.defect,
            })
            .collect(),
        elapsed: started.elapsed(),
    })
}
