//! Pointwise extrinsic geometry of a radial graph at quadrature nodes.
//!
//! With `λ = sinh r` and the round metric `σ` on the parameter sphere:
//!
//! ```text
//! g_ij = r_i r_j + λ² σ_ij
//! W    = sqrt(1 + |∇r|²_σ / λ²)
//! h_ij = (1/W) (-r_;ij + λλ' σ_ij + (2λ'/λ) r_i r_j)
//! ```
//!
//! where `r_;ij` is the covariant Hessian on the round sphere. The normal
//! points away from the base point, so geodesic spheres centered there have
//! all principal curvatures equal to `coth ρ > 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::quadrature::{GridNode, QuadratureGrid};
use super::shape::{RadialJet, RadialShape};
use crate::ambient::{AmbientPoint, RADIUS_CAP};
use crate::error::{Error, Result};
use crate::symm::{PrincipalTuple, ShapeMatrix};

/// Geometric record at one quadrature node.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub angles: [f64; 2],
    pub theta: Vec<f64>,
    pub position: AmbientPoint,
    pub jet: RadialJet,
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    /// `√det g / √det σ`, the area density against the round measure.
    pub density: f64,
    /// `dμ` at this node: `density × round weight`.
    pub area_weight: f64,
    /// Radial component of the unit normal in the orthonormal polar frame.
    pub normal_radial: f64,
    /// Coordinate components `ξ^i` of the tangential part of the normal.
    pub normal_tangential: Vec<f64>,
    pub graph_factor: f64,
    pub second_form: DMatrix<f64>,
    pub shape_operator: ShapeMatrix,
    pub principal: PrincipalTuple,
    /// `V = cosh r`.
    pub potential: f64,
    /// `p = ⟨DV, ξ⟩ = sinh r / W`.
    pub support: f64,
    /// Covector `∂_i (V ∘ X) = sinh r · r_i`.
    pub grad_potential: Vec<f64>,
}

impl SurfaceSample {
    pub fn radius(&self) -> f64 {
        self.jet.r
    }
}

/// Samples of one shape on one grid.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    dim: usize,
    samples: Vec<SurfaceSample>,
}

impl SurfaceGeometry {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn surface_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    /// `Σ_q f(sample_q) dμ_q` in node order.
    pub fn integrate<F: Fn(&SurfaceSample) -> f64>(&self, f: F) -> f64 {
        self.samples.iter().map(|s| f(s) * s.area_weight).sum()
    }

    pub fn area(&self) -> f64 {
        self.samples.iter().map(|s| s.area_weight).sum()
    }

    /// `(max r - min r) / mean r` over nodes.
    pub fn radius_spread(&self) -> f64 {
        let (lo, hi, sum) = self.samples.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            |(lo, hi, sum), s| (lo.min(s.jet.r), hi.max(s.jet.r), sum + s.jet.r),
        );
        (hi - lo) / (sum / self.samples.len() as f64)
    }

    /// Departure from total umbilicity.
    ///
    /// For surfaces (`m >= 2`) the largest pointwise relative spread of the
    /// principal curvatures; for curves, where every point is umbilic, the
    /// relative spread of the curvature along the curve (geodesic circles are
    /// exactly the constant-curvature curves).
    pub fn umbilicity_spread(&self) -> f64 {
        if self.surface_dim() >= 2 {
            return self
                .samples
                .iter()
                .map(|s| s.principal.relative_spread())
                .fold(0.0, f64::max);
        }
        let k: Vec<f64> = self.samples.iter().map(|s| s.principal.values()[0]).collect();
        let (lo, hi) = k
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        (hi - lo) / (1.0 + mean.abs())
    }
}

/// Pointwise geometry at every node of `grid`.
pub fn build_geometry(shape: &RadialShape, grid: &QuadratureGrid) -> Result<SurfaceGeometry> {
    if shape.dim() != grid.dim() {
        return Err(Error::Config(format!(
            "shape lives in H^{} but grid is for H^{}",
            shape.dim(),
            grid.dim()
        )));
    }
    if grid.resolution() < 2 * shape.band_limit() + 2 {
        return Err(Error::Config(format!(
            "grid resolution {} is below 2L + 2 = {}",
            grid.resolution(),
            2 * shape.band_limit() + 2
        )));
    }
    geometry_from_jets(shape.dim(), grid, &shape.evaluate_on(grid))
}

/// Geometry from radius jets already evaluated at the nodes of `grid`.
pub fn geometry_from_jets(dim: usize, grid: &QuadratureGrid, jets: &[RadialJet]) -> Result<SurfaceGeometry> {
    if dim != grid.dim() || jets.len() != grid.len() {
        return Err(Error::Config("jets do not match the grid".into()));
    }
    let samples = grid
        .nodes()
        .par_iter()
        .zip(jets.par_iter())
        .with_min_len(64)
        .map(|(node, jet)| node_geometry(dim, node, jet))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGeometry {
        dim,
        samples,
    })
}

/// Round metric `σ_ij` and the covariant Hessian `r_;ij` in the chart.
fn round_chart(dim: usize, angles: [f64; 2], jet: &RadialJet) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    match dim {
        2 => (
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, jet.dd[0]),
            vec![jet.d[0]],
        ),
        _ => {
            let (s, c) = angles[0].sin_cos();
            let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, s * s]);
            let r_tp = jet.dd[1] - c / s * jet.d[1];
            let hess = DMatrix::from_row_slice(
                2,
                2,
                &[jet.dd[0], r_tp, r_tp, jet.dd[2] + s * c * jet.d[0]],
            );
            (sigma, hess, vec![jet.d[0], jet.d[1]])
        }
    }
}

fn node_geometry(dim: usize, node: &GridNode, jet: &RadialJet) -> Result<SurfaceSample> {
    let r = jet.r;
    if !(r > 0.0) {
        return Err(Error::NotStarShaped(format!(
            "r = {r} at direction {:?}",
            node.theta
        )));
    }
    if r > RADIUS_CAP {
        return Err(Error::Domain(format!("r = {r} exceeds the radius cap {RADIUS_CAP}")));
    }
    let m = dim - 1;
    let (sh, ch) = (r.sinh(), r.cosh());
    let (sigma, hess, dr) = round_chart(dim, node.angles, jet);
    let sigma_inv = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 / sigma[(i, i)] } else { 0.0 });
    let grad_sq: f64 = (0..m).map(|i| sigma_inv[(i, i)] * dr[i] * dr[i]).sum();
    let w = (1.0 + grad_sq / (sh * sh)).sqrt();

    let metric = DMatrix::from_fn(m, m, |i, j| dr[i] * dr[j] + sh * sh * sigma[(i, j)]);
    let second = DMatrix::from_fn(m, m, |i, j| {
        (-hess[(i, j)] + sh * ch * sigma[(i, j)] + 2.0 * ch / sh * dr[i] * dr[j]) / w
    });
    let metric_inv = metric
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate(format!("singular metric at {:?}", node.angles)))?;
    let det_g = metric.determinant();
    let det_sigma = sigma.determinant();
    if !(det_g > 0.0) {
        return Err(Error::Degenerate(format!("metric not positive definite at {:?}", node.angles)));
    }
    let density = (det_g / det_sigma).sqrt();
    let shape_operator = ShapeMatrix::from_forms(metric.clone(), second.clone())?;
    let principal = shape_operator.eigenvalues()?;
    let normal_tangential = (0..m).map(|i| -sigma_inv[(i, i)] * dr[i] / (w * sh * sh)).collect();

    Ok(SurfaceSample {
        angles: node.angles,
        theta: node.theta.clone(),
        position: AmbientPoint::from_polar(r, &node.theta)?,
        jet: *jet,
        metric,
        metric_inv,
        density,
        area_weight: density * node.weight,
        normal_radial: 1.0 / w,
        normal_tangential,
        graph_factor: w,
        second_form: second,
        shape_operator,
        principal,
        potential: ch,
        support: sh / w,
        grad_potential: dr.iter().map(|d| sh * d).collect(),
    })
}
