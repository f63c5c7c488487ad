use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::SurfaceGeometry;
use crate::symm::{binomial, garding_membership, newton_tensor};

/// Weighted curvature integrals of one shape, all by the same node-order
/// quadrature. Every vector is indexed by the curvature order `k`; slots
/// that are undefined for `k = 0` hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTable {
    pub dimension: usize,
    pub k_max: usize,
    /// `∫ dμ`
    pub area: f64,
    /// `∫ V H_k dμ`
    pub v_h: Vec<f64>,
    /// `∫ p H_k dμ`
    pub p_h: Vec<f64>,
    /// `∫ V² H_k dμ`
    pub v2_h: Vec<f64>,
    /// `∫ p V H_k dμ`
    pub p_v_h: Vec<f64>,
    /// `(1 / (k C(m,k))) ∫ T_{k-1}(∇V, ∇V) dμ`
    pub gradient_term: Vec<Option<f64>>,
    /// `∫ V^{1 + 1/k} dμ`
    pub v_pow: Vec<Option<f64>>,
    /// `∫ p dμ`
    pub p: f64,
    /// `∫ V / H_1 dμ`, absent when `H_1 <= 0` somewhere.
    pub v_over_h1: Option<f64>,
    /// Largest `k` with the curvature tuple in `Γ_k` at every node.
    pub convexity: usize,
    /// Smallest `H_1` over the nodes.
    pub min_h1: f64,
    /// `(max r - min r) / mean r` over the nodes.
    pub radius_spread: f64,
    pub umbilicity_spread: f64,
    /// Entries left out, with the reason.
    pub skipped: Vec<String>,
}

impl FunctionalTable {
    pub fn surface_dim(&self) -> usize {
        self.dimension - 1
    }

    pub fn is_k_convex(&self, k: usize) -> bool {
        self.convexity >= k
    }
}

/// Largest `k` with `λ ∈ Γ_k` at every node (0 if even `Γ_1` fails).
pub fn convexity_order(geometry: &SurfaceGeometry) -> usize {
    let m = geometry.surface_dim();
    (1..=m)
        .take_while(|&k| {
            geometry
                .samples()
                .iter()
                .all(|s| garding_membership(&s.principal, k).unwrap_or(false))
        })
        .last()
        .unwrap_or(0)
}

/// Quadrature of every table entry up to order `k_max <= m`.
pub fn evaluate_functionals(geometry: &SurfaceGeometry, k_max: usize) -> Result<FunctionalTable> {
    let m = geometry.surface_dim();
    if k_max > m {
        return Err(Error::Domain(format!("k_max = {k_max} exceeds m = {m}")));
    }
    let samples = geometry.samples();
    let h: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| s.principal.normalized_all(m))
        .collect::<Result<_>>()?;
    let integrate = |f: &dyn Fn(usize) -> f64| -> f64 {
        samples
            .iter()
            .enumerate()
            .map(|(q, s)| f(q) * s.area_weight)
            .sum()
    };

    let mut table = FunctionalTable {
        dimension: geometry.dim(),
        k_max,
        area: integrate(&|_| 1.0),
        v_h: vec![],
        p_h: vec![],
        v2_h: vec![],
        p_v_h: vec![],
        gradient_term: vec![None],
        v_pow: vec![None],
        p: integrate(&|q| samples[q].support),
        v_over_h1: None,
        convexity: convexity_order(geometry),
        min_h1: h.iter().map(|hq| hq[1]).fold(f64::INFINITY, f64::min),
        radius_spread: geometry.radius_spread(),
        umbilicity_spread: geometry.umbilicity_spread(),
        skipped: vec![],
    };
    for k in 0..=k_max {
        table.v_h.push(integrate(&|q| samples[q].potential * h[q][k]));
        table.p_h.push(integrate(&|q| samples[q].support * h[q][k]));
        table
            .v2_h
            .push(integrate(&|q| samples[q].potential.powi(2) * h[q][k]));
        table
            .p_v_h
            .push(integrate(&|q| samples[q].support * samples[q].potential * h[q][k]));
    }
    for k in 1..=k_max {
        let contractions: Vec<f64> = samples
            .iter()
            .map(|s| {
                let t = newton_tensor(&s.shape_operator, k - 1)?.raised()?;
                let dv = &s.grad_potential;
                Ok((0..m)
                    .flat_map(|i| (0..m).map(move |j| (i, j)))
                    .map(|(i, j)| t[(i, j)] * dv[i] * dv[j])
                    .sum::<f64>())
            })
            .collect::<Result<_>>()?;
        let scale = 1.0 / (k as f64 * binomial(m, k));
        table
            .gradient_term
            .push(Some(scale * integrate(&|q| contractions[q])));
        let exponent = 1.0 + 1.0 / k as f64;
        table
            .v_pow
            .push(Some(integrate(&|q| samples[q].potential.powf(exponent))));
    }
    if table.min_h1 > 0.0 {
        table.v_over_h1 = Some(integrate(&|q| samples[q].potential / h[q][1]));
    } else {
        table.skipped.push(format!(
            "v_over_h1: mean curvature is not positive everywhere (min H_1 = {:e})",
            table.min_h1
        ));
    }
    Ok(table)
}
