//! Scenario files: a shape, a grid and a list of checks, run into a
//! [`ResidualReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambient::SphereSpec;
use crate::error::{Error, Result};
use crate::functionals::report::fmt_float;
use crate::functionals::{
    check_heintze_karcher, check_minkowski_integral, check_minkowski_pointwise,
    check_newton_maclaurin_scan, check_theorem_chains, check_weighted_minkowski,
    check_weighted_minkowski_inequality, evaluate_functionals, pointwise_minkowski_residual,
    ResidualReport, Tolerances,
};
use crate::rigidity::{OptimizerConfig, PenaltyWeights, ProbeConfig};
use crate::surface::{build_geometry, QuadratureGrid, RadialShape, ShapeFile};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    MinkowskiPointwise,
    MinkowskiIntegral,
    WeightedMinkowski,
    WeightedMinkowskiInequality,
    HeintzeKarcher,
    TheoremChains,
    NewtonMaclaurinScan,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::MinkowskiPointwise,
        CheckKind::MinkowskiIntegral,
        CheckKind::WeightedMinkowski,
        CheckKind::WeightedMinkowskiInequality,
        CheckKind::HeintzeKarcher,
        CheckKind::TheoremChains,
        CheckKind::NewtonMaclaurinScan,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSource {
    /// Geodesic sphere, centered unless `center_distance > 0`.
    Sphere {
        radius: f64,
        #[serde(default)]
        center_distance: f64,
        #[serde(default)]
        center_direction: Option<Vec<f64>>,
        #[serde(default)]
        band_limit: usize,
    },
    /// Seeded random perturbation of a centered sphere.
    Perturbed {
        radius: f64,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
        band_limit: usize,
    },
    Inline {
        shape: ShapeFile,
    },
    /// Shape file, relative paths resolved against the scenario's directory.
    File {
        path: PathBuf,
    },
}

impl ShapeSource {
    pub fn band_limit_hint(&self) -> Option<usize> {
        match self {
            ShapeSource::Sphere { band_limit, .. } | ShapeSource::Perturbed { band_limit, .. } => {
                Some(*band_limit)
            }
            ShapeSource::Inline { shape } => Some(shape.band_limit),
            ShapeSource::File { .. } => None,
        }
    }

    /// Builds the shape; `seed` overrides a perturbation seed.
    pub fn build(&self, dimension: usize, base_dir: &Path, seed: Option<u64>) -> Result<RadialShape> {
        let shape = match self {
            ShapeSource::Sphere {
                radius,
                center_distance,
                center_direction,
                band_limit,
            } => {
                if *center_distance == 0.0 {
                    RadialShape::centered_sphere(dimension, *radius)?.with_band_limit(*band_limit)?
                } else {
                    let dir = center_direction.clone().ok_or_else(|| {
                        Error::Config("off-center sphere needs center_direction".into())
                    })?;
                    let spec = SphereSpec {
                        center_distance: *center_distance,
                        center_direction: dir,
                        radius: *radius,
                    };
                    RadialShape::sphere(dimension, &spec, *band_limit)?
                }
            }
            ShapeSource::Perturbed {
                radius,
                amplitude,
                seed: own,
                band_limit,
            } => {
                let seed = seed.or(*own).unwrap_or(0);
                RadialShape::perturb_sphere(dimension, *radius, *amplitude, seed, *band_limit)?
            }
            ShapeSource::Inline { shape } => RadialShape::from_file(shape)?,
            ShapeSource::File { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)?;
                RadialShape::from_file(&serde_json::from_str(&text)?)?
            }
        };
        if shape.dim() != dimension {
            return Err(Error::Config(format!(
                "shape has dimension {} but scenario declares {dimension}",
                shape.dim()
            )));
        }
        Ok(shape)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub dimension: usize,
    pub shape: ShapeSource,
    /// Defaults to [`reference_resolution`].
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Defaults to every check.
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    /// Curvature orders; defaults to `1..=n-1`.
    #[serde(default)]
    pub k: Option<Vec<usize>>,
    /// Lower indices for the theorem chains; defaults to `[0]`.
    #[serde(default)]
    pub j: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Resolutions for convergence studies.
    #[serde(default)]
    pub resolutions: Option<Vec<usize>>,
    #[serde(default)]
    pub output: OutputPaths,
}

/// Grid resolution at which identity residuals, including the pointwise
/// one, of band-limited shapes with moderate amplitude reach the floor.
pub fn reference_resolution(dimension: usize, band_limit: usize) -> usize {
    match dimension {
        2 => 16 * band_limit + 16,
        _ => 8 * band_limit + 8,
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn surface_dim(&self) -> usize {
        self.dimension - 1
    }

    pub fn ks(&self) -> Vec<usize> {
        self.k.clone().unwrap_or_else(|| (1..=self.surface_dim()).collect())
    }

    pub fn js(&self) -> Vec<usize> {
        self.j.clone().unwrap_or_else(|| vec![0])
    }

    pub fn checks(&self) -> Vec<CheckKind> {
        let mut c = self.checks.clone().unwrap_or_else(|| CheckKind::ALL.to_vec());
        c.sort();
        c.dedup();
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        let m = self.surface_dim();
        for &k in &self.ks() {
            if k == 0 || k > m {
                return Err(Error::Config(format!("k = {k} must lie in 1..={m}")));
            }
        }
        let k_max = self.ks().into_iter().max().unwrap_or(0);
        for &j in &self.js() {
            if j >= k_max.max(1) {
                return Err(Error::Config(format!("j = {j} must be below the largest k = {k_max}")));
            }
        }
        if let (Some(res), Some(l)) = (self.resolution, self.shape.band_limit_hint()) {
            if res < 2 * l + 2 {
                return Err(Error::Config(format!("resolution {res} is below 2L + 2 = {}", 2 * l + 2)));
            }
        }
        Ok(())
    }

    fn resolve(&self, shape: &RadialShape, resolution: Option<usize>) -> usize {
        resolution
            .or(self.resolution)
            .unwrap_or_else(|| reference_resolution(self.dimension, shape.band_limit()))
    }
}

/// Overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub base_dir: PathBuf,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
}

/// Runs every requested check. Hypotheses are evaluated inside each check,
/// so unmet ones appear as `hypothesis_not_met` rows.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<ResidualReport> {
    scenario.validate()?;
    let seed = options.seed.or(scenario.seed);
    let shape = scenario.shape.build(scenario.dimension, &options.base_dir, seed)?;
    let resolution = scenario.resolve(&shape, options.resolution);
    let grid = QuadratureGrid::for_resolution(scenario.dimension, resolution)?;
    let geometry = build_geometry(&shape, &grid)?;
    let m = scenario.surface_dim();
    let table = evaluate_functionals(&geometry, m)?;
    let tol = Tolerances::default();

    let mut checks = Vec::new();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("area".to_string(), table.area);
    diagnostics.insert("convexity_order".to_string(), table.convexity as f64);
    diagnostics.insert("min_h1".to_string(), table.min_h1);
    diagnostics.insert("radius_spread".to_string(), table.radius_spread);
    diagnostics.insert("umbilicity_spread".to_string(), table.umbilicity_spread);

    let ks = scenario.ks();
    for kind in scenario.checks() {
        match kind {
            CheckKind::MinkowskiPointwise => {
                for &k in &ks {
                    checks.extend(check_minkowski_pointwise(&geometry, &grid, &table, k, &tol)?);
                }
            }
            CheckKind::MinkowskiIntegral => {
                for &k in &ks {
                    checks.push(check_minkowski_integral(&table, k, &tol)?);
                }
            }
            CheckKind::WeightedMinkowski => {
                for &k in &ks {
                    checks.extend(check_weighted_minkowski(&table, k, &tol)?);
                }
            }
            CheckKind::WeightedMinkowskiInequality => {
                for &k in &ks {
                    checks.push(check_weighted_minkowski_inequality(&table, k, &tol)?);
                }
            }
            CheckKind::HeintzeKarcher => checks.push(check_heintze_karcher(&table, &tol)),
            CheckKind::TheoremChains => {
                for &k in &ks {
                    for &j in scenario.js().iter().filter(|&&j| j < k) {
                        let chain = check_theorem_chains(&table, &geometry, k, j, &tol)?;
                        for (key, v) in chain.diagnostics {
                            diagnostics.insert(format!("chain_k{k}_j{j}_{key}"), v);
                        }
                        diagnostics.insert(
                            format!("chain_k{k}_j{j}_squeeze_closed"),
                            if chain.squeeze_closed { 1.0 } else { 0.0 },
                        );
                        checks.extend(chain.entries);
                    }
                }
            }
            CheckKind::NewtonMaclaurinScan => {
                checks.push(check_newton_maclaurin_scan(&geometry, table.convexity, &tol)?);
            }
        }
    }
    Ok(ResidualReport {
        schema: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        dimension: scenario.dimension,
        band_limit: shape.band_limit(),
        resolution,
        tolerances: tol,
        checks,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub check: String,
    pub k: usize,
    /// Relative residual of the identity at this resolution.
    pub residual: f64,
}

/// Identity residuals of the scenario's shape across grid resolutions.
pub fn run_convergence(
    scenario: &Scenario,
    resolutions: &[usize],
    options: &RunOptions,
) -> Result<Vec<ConvergenceRow>> {
    scenario.validate()?;
    let seed = options.seed.or(scenario.seed);
    let shape = scenario.shape.build(scenario.dimension, &options.base_dir, seed)?;
    if resolutions.is_empty() {
        return Err(Error::Config("no resolutions given".into()));
    }
    let m = scenario.surface_dim();
    let mut rows = Vec::new();
    for &res in resolutions {
        let grid = QuadratureGrid::for_resolution(scenario.dimension, res)?;
        let geometry = build_geometry(&shape, &grid)?;
        let table = evaluate_functionals(&geometry, m)?;
        for k in scenario.ks() {
            let rel = |a: f64, b: f64| (a - b) / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            rows.push(ConvergenceRow {
                resolution: res,
                check: "minkowski_integral".into(),
                k,
                residual: rel(table.p_h[k], table.v_h[k - 1]),
            });
            rows.push(ConvergenceRow {
                resolution: res,
                check: "weighted_minkowski".into(),
                k,
                residual: rel(table.p_v_h[k], table.v2_h[k - 1] + table.gradient_term[k].unwrap_or(0.0)),
            });
            let pointwise = pointwise_minkowski_residual(&geometry, &grid, k)?;
            rows.push(ConvergenceRow {
                resolution: res,
                check: "minkowski_pointwise_sup".into(),
                k,
                residual: pointwise.sup,
            });
        }
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("resolution,check,k,residual\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.resolution, r.check, r.k, fmt_float(r.residual));
    }
    out
}

/// Probe file: like [`ProbeConfig`] but with the initial shape given by a
/// [`ShapeSource`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeScenario {
    pub schema: u32,
    pub name: String,
    pub dimension: usize,
    pub k: usize,
    #[serde(default)]
    pub j: usize,
    /// Defaults to the initial shape's band limit.
    #[serde(default)]
    pub band_limit: Option<usize>,
    #[serde(default)]
    pub resolution: Option<usize>,
    pub initial: ShapeSource,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub penalties: PenaltyWeights,
}

impl ProbeScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let probe: ProbeScenario = serde_json::from_str(text)?;
        if probe.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                probe.schema
            )));
        }
        Ok(probe)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_config(&self, options: &RunOptions) -> Result<ProbeConfig> {
        let shape = self
            .initial
            .build(self.dimension, &options.base_dir, options.seed.or(self.seed))?;
        let config = ProbeConfig {
            dimension: self.dimension,
            k: self.k,
            j: self.j,
            band_limit: self.band_limit.unwrap_or(shape.band_limit()),
            resolution: options.resolution.or(self.resolution),
            initial: shape.to_file(format!("initial shape of probe {}", self.name)),
            optimizer: self.optimizer.clone(),
            penalties: self.penalties,
        };
        config.validate()?;
        Ok(config)
    }
}
