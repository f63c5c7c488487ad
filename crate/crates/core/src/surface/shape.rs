use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::basis::{
    basis_len, fourier_index, fourier_mode, harmonic_index, harmonic_mode, harmonic_jet,
    jet_at, LegendreTable,
};
use super::quadrature::QuadratureGrid;
use crate::ambient::{SphereSpec, RADIUS_CAP};
use crate::error::{Error, Result};
use crate::symm::garding_membership;

/// Largest band limit accepted on `S^1`.
pub const MAX_BAND_LIMIT_CIRCLE: usize = 64;
/// Largest band limit accepted on `S^2`.
pub const MAX_BAND_LIMIT_SPHERE: usize = 32;

/// Radius and its chart derivatives at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub r: f64,
    pub d: [f64; 2],
    /// `[∂_00, ∂_01, ∂_11]`
    pub dd: [f64; 3],
}

/// Star-shaped hypersurface `{(r(θ), θ)}` with `r` a truncated spectral series.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialShape {
    dim: usize,
    band_limit: usize,
    coeffs: Vec<f64>,
}

impl RadialShape {
    pub fn new(dim: usize, band_limit: usize, coeffs: Vec<f64>) -> Result<Self> {
        let cap = match dim {
            2 => MAX_BAND_LIMIT_CIRCLE,
            3 => MAX_BAND_LIMIT_SPHERE,
            d => return Err(Error::Config(format!("ambient dimension must be 2 or 3, got {d}"))),
        };
        if band_limit > cap {
            return Err(Error::Config(format!("band limit {band_limit} exceeds {cap}")));
        }
        if coeffs.len() != basis_len(dim, band_limit) {
            return Err(Error::Config(format!(
                "expected {} coefficients for band limit {band_limit}, got {}",
                basis_len(dim, band_limit),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("non-finite shape coefficient".into()));
        }
        Ok(Self {
            dim,
            band_limit,
            coeffs,
        })
    }

    /// `r ≡ ρ`.
    pub fn centered_sphere(dim: usize, rho: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; basis_len(dim, 0)];
        coeffs[0] = rho;
        let shape = Self::new(dim, 0, coeffs)?;
        if !(rho > 0.0 && rho <= RADIUS_CAP) {
            return Err(Error::NotStarShaped(format!("sphere radius {rho}")));
        }
        Ok(shape)
    }

    /// Band-limited projection of an arbitrary radius function.
    pub fn from_function<F>(dim: usize, band_limit: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let grid = QuadratureGrid::for_resolution(dim, 4 * band_limit + 8)?;
        let n = basis_len(dim, band_limit);
        let mut coeffs = vec![0.0; n];
        let area = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
        for node in grid.nodes() {
            let value = f(&node.theta)?;
            let jet = jet_at(dim, band_limit, node.angles);
            for (c, y) in coeffs.iter_mut().zip(&jet.value) {
                *c += node.weight * value * y;
            }
        }
        for (i, c) in coeffs.iter_mut().enumerate() {
            let mean_square = if dim == 2 && i > 0 { 0.5 } else { 1.0 };
            *c /= area * mean_square;
        }
        Self::new(dim, band_limit, coeffs)
    }

    /// Geodesic sphere, possibly off-center, projected to `band_limit`.
    pub fn sphere(dim: usize, spec: &SphereSpec, band_limit: usize) -> Result<Self> {
        if spec.center_direction.len() != dim {
            return Err(Error::Config(format!(
                "center direction has {} entries, expected {dim}",
                spec.center_direction.len()
            )));
        }
        if spec.center_distance == 0.0 {
            return Self::centered_sphere(dim, spec.radius);
        }
        if !spec.is_star_shaped() {
            return Err(Error::NotStarShaped(format!(
                "center distance {} >= radius {}",
                spec.center_distance, spec.radius
            )));
        }
        Self::from_function(dim, band_limit, |theta| spec.radial_function(theta))
    }

    /// `ρ + amplitude · f` with `f` a seeded random band-limited function of
    /// unit sup-norm and zero mean. Draws are repeated (up to 64 times) until
    /// the shape is `(n-1)`-convex at every node of a `4L + 4` check grid.
    pub fn perturb_sphere(
        dim: usize,
        rho: f64,
        amplitude: f64,
        seed: u64,
        band_limit: usize,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho <= RADIUS_CAP) {
            return Err(Error::Config(format!("sphere radius {rho} out of range")));
        }
        if !(0.0..rho / 2.0).contains(&amplitude) {
            return Err(Error::Config(format!(
                "amplitude {amplitude} must lie in [0, ρ/2) = [0, {})",
                rho / 2.0
            )));
        }
        if amplitude == 0.0 || band_limit == 0 {
            let mut coeffs = vec![0.0; basis_len(dim, band_limit)];
            coeffs[0] = rho;
            return Self::new(dim, band_limit, coeffs);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = basis_len(dim, band_limit);
        let sup_grid = QuadratureGrid::for_resolution(dim, 8 * band_limit + 8)?;
        let check_grid = QuadratureGrid::for_resolution(dim, 4 * band_limit + 4)?;
        for _ in 0..64 {
            let mut raw = vec![0.0; n];
            for (i, c) in raw.iter_mut().enumerate().skip(1) {
                let l = super::basis::degree(dim, i) as f64;
                let per_mode = if dim == 2 { 1.0 } else { (2.0 * l + 1.0).sqrt() };
                let z: f64 = StandardNormal.sample(&mut rng);
                *c = z / ((1.0 + l) * (1.0 + l) * per_mode);
            }
            let probe = Self::new(dim, band_limit, raw.clone())?;
            let sup = probe
                .evaluate_on(&sup_grid)
                .iter()
                .fold(0.0f64, |m, j| m.max(j.r.abs()));
            if sup == 0.0 {
                continue;
            }
            let mut coeffs: Vec<f64> = raw.iter().map(|c| amplitude * c / sup).collect();
            coeffs[0] = rho;
            let shape = Self::new(dim, band_limit, coeffs)?;
            let geometry = match super::geometry::build_geometry(&shape, &check_grid) {
                Ok(g) => g,
                Err(Error::NotStarShaped(_)) | Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            };
            let m = dim - 1;
            let convex = geometry
                .samples()
                .iter()
                .all(|s| garding_membership(&s.principal, m).unwrap_or(false));
            if convex {
                return Ok(shape);
            }
        }
        Err(Error::NotStarShaped(format!(
            "no convex star-shaped perturbation found for ρ = {rho}, amplitude = {amplitude}, seed = {seed}"
        )))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Intrinsic dimension `m = n - 1` of the hypersurface.
    pub fn surface_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Same coefficients zero-padded to a larger band limit.
    pub fn with_band_limit(&self, band_limit: usize) -> Result<Self> {
        if band_limit < self.band_limit {
            return Err(Error::Config("cannot truncate a shape by padding".into()));
        }
        let mut coeffs = vec![0.0; basis_len(self.dim, band_limit)];
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = match self.dim {
                2 => fourier_index(fourier_mode(i)),
                _ => {
                    let (l, m) = harmonic_mode(i);
                    harmonic_index(l, m)
                }
            };
            coeffs[j] = *c;
        }
        Self::new(self.dim, band_limit, coeffs)
    }

    fn contract(&self, jet: &super::basis::BasisJet) -> RadialJet {
        let dot = |v: &[f64]| v.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum::<f64>();
        RadialJet {
            r: dot(&jet.value),
            d: [dot(&jet.first[0]), dot(&jet.first[1])],
            dd: [dot(&jet.second[0]), dot(&jet.second[1]), dot(&jet.second[2])],
        }
    }

    /// Radius and analytic derivatives at chart coordinates.
    pub fn jet(&self, angles: [f64; 2]) -> RadialJet {
        self.contract(&jet_at(self.dim, self.band_limit, angles))
    }

    pub fn radius_at(&self, angles: [f64; 2]) -> f64 {
        self.jet(angles).r
    }

    /// Jets at every grid node; Legendre tables are shared along rings.
    pub fn evaluate_on(&self, grid: &QuadratureGrid) -> Vec<RadialJet> {
        match self.dim {
            2 => grid.nodes().iter().map(|n| self.jet(n.angles)).collect(),
            _ => {
                let na = grid.n_azimuth();
                let mut out = Vec::with_capacity(grid.len());
                for (i, &t) in grid.polar_angles().iter().enumerate() {
                    let table = LegendreTable::new(self.band_limit, t);
                    for node in &grid.nodes()[i * na..(i + 1) * na] {
                        out.push(self.contract(&harmonic_jet(self.band_limit, &table, node.angles[1])));
                    }
                }
                out
            }
        }
    }

    /// Shape rotated by `angle` about the last coordinate axis:
    /// `r'(φ) = r(φ - angle)`.
    pub fn rotate_azimuth(&self, angle: f64) -> Self {
        let mut out = self.coeffs.clone();
        let rotate = |c: f64, s: f64, m: f64| {
            let (sa, ca) = (m * angle).sin_cos();
            (c * ca - s * sa, c * sa + s * ca)
        };
        match self.dim {
            2 => {
                for l in 1..=self.band_limit as i64 {
                    let (ic, is) = (fourier_index(l), fourier_index(-l));
                    let (c, s) = rotate(self.coeffs[ic], self.coeffs[is], l as f64);
                    out[ic] = c;
                    out[is] = s;
                }
            }
            _ => {
                for l in 1..=self.band_limit {
                    for m in 1..=l as i64 {
                        let (ic, is) = (harmonic_index(l, m), harmonic_index(l, -m));
                        let (c, s) = rotate(self.coeffs[ic], self.coeffs[is], m as f64);
                        out[ic] = c;
                        out[is] = s;
                    }
                }
            }
        }
        Self {
            dim: self.dim,
            band_limit: self.band_limit,
            coeffs: out,
        }
    }

    /// Round-measure mean and relative standard deviation `std(r)/r̄`.
    pub fn radius_statistics(&self, grid: &QuadratureGrid) -> (f64, f64) {
        let rs: Vec<f64> = self.evaluate_on(grid).iter().map(|j| j.r).collect();
        let area = grid.integrate(&vec![1.0; rs.len()]);
        let mean = grid.integrate(&rs) / area;
        let var = grid.integrate(&rs.iter().map(|r| (r - mean).powi(2)).collect::<Vec<_>>()) / area;
        (mean, var.max(0.0).sqrt() / mean)
    }

    pub fn to_file(&self, description: impl Into<String>) -> ShapeFile {
        let coefficients = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &value)| match self.dim {
                2 => CoefficientEntry {
                    l: fourier_mode(i),
                    m: None,
                    value,
                },
                _ => {
                    let (l, m) = harmonic_mode(i);
                    CoefficientEntry {
                        l: l as i64,
                        m: Some(m),
                        value,
                    }
                }
            })
            .collect();
        ShapeFile {
            dimension: self.dim,
            band_limit: self.band_limit,
            coefficients,
            description: description.into(),
        }
    }

    pub fn from_file(file: &ShapeFile) -> Result<Self> {
        let n = basis_len(file.dimension, file.band_limit);
        let mut coeffs = vec![0.0; n];
        let mut seen = vec![false; n];
        for entry in &file.coefficients {
            let index = match (file.dimension, entry.m) {
                (2, None) if entry.l.unsigned_abs() as usize <= file.band_limit => {
                    fourier_index(entry.l)
                }
                (3, Some(m))
                    if entry.l >= 0
                        && (entry.l as usize) <= file.band_limit
                        && m.abs() <= entry.l =>
                {
                    harmonic_index(entry.l as usize, m)
                }
                _ => {
                    return Err(Error::Config(format!(
                        "coefficient (l = {}, m = {:?}) is invalid for dimension {} band limit {}",
                        entry.l, entry.m, file.dimension, file.band_limit
                    )))
                }
            };
            if seen[index] {
                return Err(Error::Config(format!("duplicate coefficient l = {}, m = {:?}", entry.l, entry.m)));
            }
            seen[index] = true;
            coeffs[index] = entry.value;
        }
        Self::new(file.dimension, file.band_limit, coeffs)
    }
}

/// One spectral coefficient. On `S^1`, `l < 0` denotes `sin(|l|φ)`; on
/// `S^2`, `m < 0` denotes the `sin(|m|φ)` harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub l: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    pub value: f64,
}

/// On-disk shape description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFile {
    pub dimension: usize,
    pub band_limit: usize,
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default)]
    pub description: String,
}
