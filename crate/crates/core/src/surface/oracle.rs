//! Shape operator computed extrinsically in the hyperboloid model by central
//! finite differences of the embedding, sharing nothing with the graph
//! formulas except the radius function itself.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::shape::RadialShape;
use crate::ambient::minkowski;
use crate::error::{Error, Result};

fn direction(dim: usize, angles: [f64; 2]) -> Vec<f64> {
    match dim {
        2 => vec![angles[0].cos(), angles[0].sin()],
        _ => {
            let (st, ct) = angles[0].sin_cos();
            vec![st * angles[1].cos(), st * angles[1].sin(), ct]
        }
    }
}

fn embed(shape: &RadialShape, angles: [f64; 2]) -> Vec<f64> {
    let r = shape.radius_at(angles);
    let theta = direction(shape.dim(), angles);
    let mut x = Vec::with_capacity(theta.len() + 1);
    x.push(r.cosh());
    x.extend(theta.iter().map(|t| r.sinh() * t));
    x
}

fn combine(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n).map(|i| terms.iter().map(|(c, v)| c * v[i]).sum()).collect()
}

/// `g⁻¹ h` at chart coordinates `angles`, with `h_ij = -⟨∂_i∂_j X, ν⟩` and
/// `ν` the outward unit normal tangent to the hyperboloid.
///
/// On `S^2` nodes within `2h` of a pole are refused.
pub fn oracle_shape_operator(shape: &RadialShape, angles: [f64; 2], h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::StepTooLarge(h));
    }
    let dim = shape.dim();
    let m = dim - 1;
    if dim == 3 && (angles[0] < 2.0 * h || angles[0] > PI - 2.0 * h) {
        return Err(Error::Degenerate(format!(
            "node at polar angle {} is within 2h of a pole",
            angles[0]
        )));
    }
    let at = |offsets: [f64; 2]| embed(shape, [angles[0] + offsets[0], angles[1] + offsets[1]]);
    let unit = |i: usize, s: f64| {
        let mut o = [0.0; 2];
        o[i] = s * h;
        o
    };
    let x0 = at([0.0, 0.0]);
    if !(x0[0].acosh() > 0.0) {
        return Err(Error::NotStarShaped("radius is not positive".into()));
    }
    let mut first = Vec::with_capacity(m);
    let mut second = vec![vec![Vec::new(); m]; m];
    for i in 0..m {
        let (p, q) = (at(unit(i, 1.0)), at(unit(i, -1.0)));
        first.push(combine(&[(0.5 / h, &p), (-0.5 / h, &q)]));
        second[i][i] = combine(&[(1.0 / (h * h), &p), (-2.0 / (h * h), &x0), (1.0 / (h * h), &q)]);
        for j in 0..i {
            let mut pp = [0.0; 2];
            pp[i] = h;
            pp[j] = h;
            let mut pm = pp;
            pm[j] = -h;
            let mut mp = pp;
            mp[i] = -h;
            let mm = [-pp[0], -pp[1]];
            let c = 0.25 / (h * h);
            let v = combine(&[(c, &at(pp)), (-c, &at(pm)), (-c, &at(mp)), (c, &at(mm))]);
            second[i][j] = v.clone();
            second[j][i] = v;
        }
    }
    let g = DMatrix::from_fn(m, m, |i, j| minkowski(&first[i], &first[j]));
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("oracle metric is singular".into()))?;

    // outward radial unit vector at X, then remove its tangential part
    let r = x0[0].acosh();
    let spatial_norm = x0[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut radial = vec![r.sinh()];
    radial.extend(x0[1..].iter().map(|v| r.cosh() * v / spatial_norm));
    let proj: Vec<f64> = first.iter().map(|xi| minkowski(&radial, xi)).collect();
    let mut nu = radial.clone();
    for i in 0..m {
        let coeff: f64 = (0..m).map(|j| g_inv[(i, j)] * proj[j]).sum();
        for (a, b) in nu.iter_mut().zip(&first[i]) {
            *a -= coeff * b;
        }
    }
    let len = minkowski(&nu, &nu).sqrt();
    nu.iter_mut().for_each(|v| *v /= len);

    let second_form = DMatrix::from_fn(m, m, |i, j| -minkowski(&second[i][j], &nu));
    Ok(g_inv * second_form)
}
