//! Pointwise residual of the weighted Minkowski identity
//! `div(T_{k-1} ∇V) = -k p σ_k + (n - k) V σ_{k-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{QuadratureGrid, SurfaceGeometry};
use crate::symm::{binomial, newton_tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseResidual {
    pub k: usize,
    /// `div(T_{k-1} ∇V) + k p σ_k - (n - k) V σ_{k-1}` at every node.
    pub field: Vec<f64>,
    pub sup: f64,
    /// `Σ_q R_q dμ_q`.
    pub integrated: f64,
    /// `integrated / (k C(m,k))`, directly comparable to
    /// `∫ p H_k - ∫ V H_{k-1}`.
    pub integrated_normalized: f64,
}

/// Residual field with the divergence taken spectrally on `grid`, which must
/// be the grid the geometry was built on.
pub fn pointwise_minkowski_residual(
    geometry: &SurfaceGeometry,
    grid: &QuadratureGrid,
    k: usize,
) -> Result<PointwiseResidual> {
    let m = geometry.surface_dim();
    let n = geometry.dim();
    if k == 0 || k > m {
        return Err(Error::Domain(format!("k = {k} must lie in 1..={m}")));
    }
    if grid.len() != geometry.samples().len() || grid.dim() != n {
        return Err(Error::Config("grid does not match the sampled geometry".into()));
    }
    let samples = geometry.samples();

    // densitized flux components √g Y^j with Y^j = (T_{k-1})^j_l g^{li} ∂_i V
    let mut flux = vec![vec![0.0; samples.len()]; m];
    for (q, s) in samples.iter().enumerate() {
        let t = newton_tensor(&s.shape_operator, k - 1)?.raised()?;
        let sqrt_sigma = if n == 2 { 1.0 } else { s.angles[0].sin() };
        let sqrt_g = s.density * sqrt_sigma;
        for (j, comp) in flux.iter_mut().enumerate() {
            let y: f64 = (0..m).map(|i| t[(j, i)] * s.grad_potential[i]).sum();
            comp[q] = sqrt_g * y;
        }
    }
    let divergence_numerator: Vec<f64> = match n {
        2 => grid.d_azimuth(&flux[0]),
        _ => {
            let d_polar = grid.d_polar(&flux[0])?;
            let d_az = grid.d_azimuth(&flux[1]);
            d_polar.iter().zip(&d_az).map(|(a, b)| a + b).collect()
        }
    };

    let (ck, ck1) = (binomial(m, k), binomial(m, k - 1));
    let field: Vec<f64> = samples
        .iter()
        .zip(&divergence_numerator)
        .map(|(s, num)| {
            let sqrt_sigma = if n == 2 { 1.0 } else { s.angles[0].sin() };
            let div = num / (s.density * sqrt_sigma);
            let h = s.principal.normalized_all(k).expect("k <= m checked above");
            div + k as f64 * s.support * ck * h[k] - (n - k) as f64 * s.potential * ck1 * h[k - 1]
        })
        .collect();
    let sup = field.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let integrated: f64 = field
        .iter()
        .zip(samples)
        .map(|(r, s)| r * s.area_weight)
        .sum();
    Ok(PointwiseResidual {
        k,
        sup,
        integrated,
        integrated_normalized: integrated / (k as f64 * ck),
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::evaluate_functionals;
    use crate::surface::{build_geometry, RadialShape};

    #[test]
    fn vanishes_on_centered_spheres() {
        for dim in [2usize, 3] {
            let shape = RadialShape::centered_sphere(dim, 1.0).unwrap();
            let grid = QuadratureGrid::for_resolution(dim, 10).unwrap();
            let geo = build_geometry(&shape, &grid).unwrap();
            for k in 1..dim {
                let res = pointwise_minkowski_residual(&geo, &grid, k).unwrap();
                assert!(res.sup < 1e-10, "dim {dim} k {k}: {}", res.sup);
            }
        }
    }

    #[test]
    fn spectral_decay_under_refinement() {
        for dim in [2usize, 3] {
            let shape = RadialShape::perturb_sphere(dim, 1.0, 0.1, 7, 4).unwrap();
            let sups: Vec<f64> = [12usize, 24]
                .iter()
                .map(|&res| {
                    let grid = QuadratureGrid::for_resolution(dim, res).unwrap();
                    let geo = build_geometry(&shape, &grid).unwrap();
                    pointwise_minkowski_residual(&geo, &grid, dim - 1).unwrap().sup
                })
                .collect();
            assert!(sups[1] < sups[0] / 10.0 || sups[1] < 1e-11, "dim {dim}: {sups:?}");
        }
    }

    #[test]
    fn discrete_divergence_theorem() {
        for dim in [2usize, 3] {
            let shape = RadialShape::perturb_sphere(dim, 1.0, 0.1, 7, 4).unwrap();
            let grid = QuadratureGrid::for_resolution(dim, 32).unwrap();
            let geo = build_geometry(&shape, &grid).unwrap();
            let table = evaluate_functionals(&geo, dim - 1).unwrap();
            for k in 1..dim {
                let res = pointwise_minkowski_residual(&geo, &grid, k).unwrap();
                let integral_residual = table.p_h[k] - table.v_h[k - 1];
                assert!(
                    (res.integrated_normalized - integral_residual).abs() < 1e-10,
                    "dim {dim} k {k}: {} vs {}",
                    res.integrated_normalized,
                    integral_residual
                );
            }
        }
    }
}
