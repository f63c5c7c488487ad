//! Hyperbolic space `H^n` in polar coordinates about a base point and in the
//! hyperboloid model, the static potentials `Hess V = V b`, and geodesic
//! spheres used as reference shapes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest geodesic radius any constructor accepts.
pub const RADIUS_CAP: f64 = 10.0;

/// Minkowski product with signature `(-, +, ..., +)`.
pub fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of `H^n`, held in both polar and hyperboloid form.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    r: f64,
    theta: Vec<f64>,
    hyperboloid: Vec<f64>,
}

impl AmbientPoint {
    /// From geodesic distance `r` to the base point and a direction on `S^{n-1}`.
    pub fn from_polar(r: f64, theta: &[f64]) -> Result<Self> {
        if !(0.0..=RADIUS_CAP).contains(&r) {
            return Err(Error::Domain(format!(
                "radius {r} outside [0, {RADIUS_CAP}]"
            )));
        }
        let len = norm(theta);
        if theta.is_empty() || (len - 1.0).abs() > 1e-10 {
            return Err(Error::Domain("direction must be a unit vector".into()));
        }
        let theta: Vec<f64> = theta.iter().map(|t| t / len).collect();
        let mut x = Vec::with_capacity(theta.len() + 1);
        x.push(r.cosh());
        x.extend(theta.iter().map(|t| r.sinh() * t));
        Ok(Self {
            r,
            theta,
            hyperboloid: x,
        })
    }

    /// From a point `X` on the upper sheet `⟨X,X⟩ = -1`, `X⁰ > 0`.
    ///
    /// At the base point itself the direction defaults to the first axis.
    pub fn from_hyperboloid(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Domain("hyperboloid point needs n + 1 >= 2 entries".into()));
        }
        if x[0] <= 0.0 || (minkowski(x, x) + 1.0).abs() > 1e-8 * x[0] * x[0] {
            return Err(Error::Domain("point is not on the upper hyperboloid sheet".into()));
        }
        let spatial = &x[1..];
        let s = norm(spatial);
        let r = s.asinh();
        let theta = if s > 0.0 {
            spatial.iter().map(|v| v / s).collect()
        } else {
            let mut e = vec![0.0; spatial.len()];
            e[0] = 1.0;
            e
        };
        Self::from_polar(r, &theta)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn hyperboloid(&self) -> &[f64] {
        &self.hyperboloid
    }

    /// Geodesic distance to another point.
    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        (-minkowski(&self.hyperboloid, &other.hyperboloid)).max(1.0).acosh()
    }
}

/// Element of the static potential space, `V = a₀ cosh r + Σ aᵢ xⁱ sinh r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticPotential {
    pub coeffs: Vec<f64>,
}

/// Ambient gradient `DV` in the orthonormal polar frame at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGradient {
    /// Component along the unit radial direction `∂_r`.
    pub radial: f64,
    /// Angular part as an `R^n` vector orthogonal to `θ`, in unit-length frame.
    pub angular: Vec<f64>,
}

impl PotentialGradient {
    pub fn norm(&self) -> f64 {
        (self.radial * self.radial + dot(&self.angular, &self.angular)).sqrt()
    }
}

impl StaticPotential {
    /// Basis element `V_(i)`; `V_(0) = cosh r`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = 1.0;
        Self { coeffs }
    }

    /// The weight used throughout: `V = cosh r`.
    pub fn cosh_r(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// `cosh dist(c, ·)` for a point `c` at distance `d` along `direction`.
    pub fn centered_at(d: f64, direction: &[f64]) -> Result<Self> {
        let c = AmbientPoint::from_polar(d, direction)?;
        let x = c.hyperboloid();
        let mut coeffs = Vec::with_capacity(x.len());
        coeffs.push(x[0]);
        coeffs.extend(x[1..].iter().map(|v| -v));
        Ok(Self { coeffs })
    }

    /// Lorentz product `η(V, W) = a₀b₀ - Σ aᵢbᵢ`.
    pub fn eta(&self, other: &StaticPotential) -> f64 {
        -minkowski(&self.coeffs, &other.coeffs)
    }

    fn check_dim(&self, at: &AmbientPoint) -> Result<()> {
        if self.coeffs.len() != at.dim() + 1 {
            return Err(Error::Domain(format!(
                "potential has {} coefficients but point lives in H^{}",
                self.coeffs.len(),
                at.dim()
            )));
        }
        Ok(())
    }

    /// Value in polar coordinates.
    pub fn value(&self, at: &AmbientPoint) -> Result<f64> {
        self.check_dim(at)?;
        let (r, theta) = (at.r(), at.theta());
        Ok(self.coeffs[0] * r.cosh() + dot(&self.coeffs[1..], theta) * r.sinh())
    }

    /// Value as a linear function on the hyperboloid.
    pub fn value_hyperboloid(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }

    pub fn value_and_gradient(&self, at: &AmbientPoint) -> Result<(f64, PotentialGradient)> {
        let value = self.value(at)?;
        let (r, theta) = (at.r(), at.theta());
        let a = &self.coeffs[1..];
        let a_theta = dot(a, theta);
        let radial = self.coeffs[0] * r.sinh() + a_theta * r.cosh();
        // (1/sinh r) ∂_θ (a·θ sinh r) = tangential projection of a
        let angular = a.iter().zip(theta).map(|(ai, ti)| ai - a_theta * ti).collect();
        Ok((value, PotentialGradient { radial, angular }))
    }

    /// Minimum point when `V` lies in the unit future hyperboloid of `η`.
    pub fn center(&self) -> Result<AmbientPoint> {
        if self.coeffs[0] <= 0.0 || (self.eta(self) - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(
                "potential is not a future unit element (η(V,V) = 1, a₀ > 0)".into(),
            ));
        }
        let mut x = Vec::with_capacity(self.coeffs.len());
        x.push(self.coeffs[0]);
        x.extend(self.coeffs[1..].iter().map(|v| -v));
        AmbientPoint::from_hyperboloid(&x)
    }
}

/// Orthonormal tangent basis of `H^n` at `x`: radial direction first.
fn tangent_frame(at: &AmbientPoint) -> Vec<Vec<f64>> {
    let n = at.dim();
    let (r, theta) = (at.r(), at.theta());
    let mut frame = Vec::with_capacity(n);
    let mut radial = vec![r.sinh()];
    radial.extend(theta.iter().map(|t| r.cosh() * t));
    frame.push(radial);
    // Gram-Schmidt of the coordinate axes against θ.
    let mut spatial: Vec<Vec<f64>> = vec![theta.to_vec()];
    for axis in 0..n {
        if spatial.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for u in &spatial {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
        }
        let len = norm(&v);
        if len > 1e-6 {
            v.iter_mut().for_each(|vi| *vi /= len);
            spatial.push(v);
        }
    }
    for u in spatial.into_iter().skip(1) {
        let mut w = vec![0.0];
        w.extend(u);
        frame.push(w);
    }
    frame
}

/// Point `cosh(t) X + sinh(t) u` on the geodesic through `X` with unit velocity `u`.
fn geodesic(x: &[f64], u: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(u).map(|(a, b)| t.cosh() * a + t.sinh() * b).collect()
}

/// Frobenius norm of `Hess V - V b` estimated by geodesic central differences.
///
/// Each second derivative is taken along an exponential-map geodesic in the
/// hyperboloid model; off-diagonal entries use polarization. The potential is
/// evaluated through its polar formula after mapping back.
pub fn hessian_residual(v: &StaticPotential, at: &AmbientPoint, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::StepTooLarge(h));
    }
    if at.r() <= 0.0 {
        return Err(Error::Domain("polar chart needs r > 0".into()));
    }
    v.check_dim(at)?;
    let x = at.hyperboloid();
    let frame = tangent_frame(at);
    let n = frame.len();
    let eval = |p: Vec<f64>| -> Result<f64> { v.value(&AmbientPoint::from_hyperboloid(&p)?) };
    let v0 = v.value(at)?;
    let second = |u: &[f64]| -> Result<f64> {
        Ok((eval(geodesic(x, u, h))? - 2.0 * v0 + eval(geodesic(x, u, -h))?) / (h * h))
    };
    let mut diag = vec![0.0; n];
    for (a, u) in frame.iter().enumerate() {
        diag[a] = second(u)?;
    }
    let mut sum = 0.0;
    for a in 0..n {
        sum += (diag[a] - v0).powi(2);
        for b in (a + 1)..n {
            let w: Vec<f64> = frame[a]
                .iter()
                .zip(&frame[b])
                .map(|(p, q)| (p + q) / std::f64::consts::SQRT_2)
                .collect();
            // Hess(w,w) = (Hess_aa + Hess_bb)/2 + Hess_ab
            let off = second(&w)? - 0.5 * (diag[a] + diag[b]);
            sum += 2.0 * off * off;
        }
    }
    Ok(sum.sqrt())
}

/// A geodesic sphere of radius `ρ` whose center sits at distance `d` from the
/// base point along `center_direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub center_distance: f64,
    pub center_direction: Vec<f64>,
    pub radius: f64,
}

impl SphereSpec {
    pub fn centered(radius: f64, n: usize) -> Self {
        let mut dir = vec![0.0; n];
        dir[n - 1] = 1.0;
        Self {
            center_distance: 0.0,
            center_direction: dir,
            radius,
        }
    }

    pub fn is_star_shaped(&self) -> bool {
        self.center_distance < self.radius
    }

    /// Principal curvature shared by every point of the sphere.
    pub fn principal_curvature(&self) -> f64 {
        1.0 / self.radius.tanh()
    }

    /// Distance `r(θ)` from the base point to the sphere along `theta`.
    ///
    /// Solves `cosh ρ = cosh r cosh d - sinh r sinh d cos α` in closed form:
    /// the left side is `√(a² - b²) cosh(r - φ)` with `tanh φ = b / a`.
    pub fn radial_function(&self, theta: &[f64]) -> Result<f64> {
        let (d, rho) = (self.center_distance, self.radius);
        if !(rho > 0.0) || d < 0.0 {
            return Err(Error::Domain(format!("invalid sphere d = {d}, ρ = {rho}")));
        }
        if !self.is_star_shaped() {
            return Err(Error::NotStarShaped(format!(
                "center distance {d} >= radius {rho}"
            )));
        }
        if d == 0.0 {
            return Ok(rho);
        }
        let len = norm(&self.center_direction);
        let cos_alpha = dot(theta, &self.center_direction) / (len * norm(theta));
        let a = d.cosh();
        let b = d.sinh() * cos_alpha.clamp(-1.0, 1.0);
        let s = (a * a - b * b).sqrt();
        let arg = rho.cosh() / s;
        if arg < 1.0 {
            return Err(Error::Internal("no positive root for sphere radius".into()));
        }
        let r = (b / a).atanh() + arg.acosh();
        if r <= 0.0 || r > RADIUS_CAP {
            return Err(Error::Internal(format!("sphere radius {r} out of range")));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l = norm(&v);
            if l > 0.1 && l <= 1.0 {
                return v.iter().map(|x| x / l).collect();
            }
        }
    }

    #[test]
    fn polar_hyperboloid_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=4 {
            for _ in 0..200 {
                let r = rng.gen_range(0.01..10.0);
                let theta = random_unit(&mut rng, n);
                let p = AmbientPoint::from_polar(r, &theta).unwrap();
                assert!((minkowski(p.hyperboloid(), p.hyperboloid()) + 1.0).abs() < 1e-12 * p.hyperboloid()[0].powi(2));
                assert_eq!(p.hyperboloid()[0], r.cosh());
                let q = AmbientPoint::from_hyperboloid(p.hyperboloid()).unwrap();
                assert!((q.r() - r).abs() < 1e-12);
                for (a, b) in q.theta().iter().zip(&theta) {
                    assert!((a - b).abs() < 1e-12);
                }
                let v = StaticPotential::cosh_r(n).value(&p).unwrap();
                assert_eq!(v, p.hyperboloid()[0]);
            }
        }
        assert!(AmbientPoint::from_polar(10.5, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn potential_examples() {
        let v0 = StaticPotential::cosh_r(3);
        let p = AmbientPoint::from_polar(1.0, &[1.0, 0.0, 0.0]).unwrap();
        let (val, grad) = v0.value_and_gradient(&p).unwrap();
        assert_relative_eq!(val, 1.543081, epsilon = 1e-6);
        assert_relative_eq!(grad.norm(), 1.175201, epsilon = 1e-6);
        assert_relative_eq!(grad.radial, 1.0f64.sinh(), epsilon = 1e-15);
        assert!(grad.angular.iter().all(|a| *a == 0.0));

        let origin = AmbientPoint::from_polar(0.0, &[0.0, 0.0, 1.0]).unwrap();
        let (val, grad) = v0.value_and_gradient(&origin).unwrap();
        assert_eq!(val, 1.0);
        assert_eq!(grad.norm(), 0.0);

        let v1 = StaticPotential::basis(3, 1);
        assert_relative_eq!(v1.value(&p).unwrap(), 1.175201, epsilon = 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = StaticPotential { coeffs: vec![1.3, -0.2, 0.5, 0.1] };
        for _ in 0..20 {
            let p = AmbientPoint::from_polar(rng.gen_range(0.2..3.0), &random_unit(&mut rng, 3)).unwrap();
            let (_, grad) = v.value_and_gradient(&p).unwrap();
            let frame = tangent_frame(&p);
            let h = 1e-5;
            for (a, u) in frame.iter().enumerate() {
                let plus = AmbientPoint::from_hyperboloid(&geodesic(p.hyperboloid(), u, h)).unwrap();
                let minus = AmbientPoint::from_hyperboloid(&geodesic(p.hyperboloid(), u, -h)).unwrap();
                let fd = (v.value(&plus).unwrap() - v.value(&minus).unwrap()) / (2.0 * h);
                let exact = if a == 0 { grad.radial } else { dot(&grad.angular, &u[1..]) };
                assert!((fd - exact).abs() < 1e-7, "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn eta_is_orthonormal_on_basis() {
        let n = 3;
        for i in 0..=n {
            for j in 0..=n {
                let e = StaticPotential::basis(n, i).eta(&StaticPotential::basis(n, j));
                let expected = match (i, j) {
                    (0, 0) => 1.0,
                    _ if i == j => -1.0,
                    _ => 0.0,
                };
                assert_eq!(e, expected);
            }
        }
    }

    #[test]
    fn hessian_residual_is_second_order() {
        let v0 = StaticPotential::cosh_r(3);
        let p = AmbientPoint::from_polar(1.0, &[0.0, 0.6, 0.8]).unwrap();
        let r1 = hessian_residual(&v0, &p, 1e-3).unwrap();
        assert!(r1 < 1e-5, "{r1}");
        let coarse = hessian_residual(&v0, &p, 1e-2).unwrap();
        let fine = hessian_residual(&v0, &p, 5e-3).unwrap();
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        assert!(matches!(hessian_residual(&v0, &p, 0.2), Err(Error::StepTooLarge(_))));
        let origin = AmbientPoint::from_polar(0.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!(hessian_residual(&v0, &origin, 1e-3).is_err());
    }

    #[test]
    fn every_static_potential_satisfies_the_hessian_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let v = StaticPotential { coeffs: (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect() };
            let p = AmbientPoint::from_polar(rng.gen_range(0.3..2.0), &random_unit(&mut rng, 3)).unwrap();
            let coarse = hessian_residual(&v, &p, 1e-2).unwrap();
            let fine = hessian_residual(&v, &p, 1e-3).unwrap();
            assert!(fine < coarse / 50.0 || fine < 1e-8, "{coarse} -> {fine}");
        }
    }

    #[test]
    fn unit_potentials_are_cosh_of_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let d = rng.gen_range(0.0..2.0);
            let dir = random_unit(&mut rng, 2);
            let v = StaticPotential::centered_at(d, &dir).unwrap();
            assert!((v.eta(&v) - 1.0).abs() < 1e-10);
            assert!(v.coeffs[0] > 0.0);
            let c = v.center().unwrap();
            assert!((c.r() - d).abs() < 1e-9);
            // coarse polar grid search for the minimum
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for i in 0..=120 {
                let r = 3.0 * i as f64 / 120.0;
                for j in 0..180 {
                    let phi = 2.0 * PI * j as f64 / 180.0;
                    let p = AmbientPoint::from_polar(r, &[phi.cos(), phi.sin()]).unwrap();
                    let val = v.value(&p).unwrap();
                    if val < best.0 {
                        best = (val, r, phi);
                    }
                    let exact = p.distance(&c).cosh();
                    assert!((val - exact).abs() < 1e-9 * exact);
                }
            }
            assert!(best.0 >= 1.0 - 1e-12);
            assert!(best.0 < 1.0 + 2e-3, "min {}", best.0);
            assert!((best.1 - d).abs() < 0.05);
        }
    }

    #[test]
    fn sphere_radial_examples() {
        let centered = SphereSpec::centered(1.0, 3);
        assert_eq!(centered.radial_function(&[0.6, 0.0, 0.8]).unwrap(), 1.0);
        let off = SphereSpec { center_distance: 0.3, center_direction: vec![0.0, 0.0, 1.0], radius: 1.0 };
        assert_relative_eq!(off.radial_function(&[0.0, 0.0, 1.0]).unwrap(), 1.3, epsilon = 1e-12);
        assert_relative_eq!(off.radial_function(&[0.0, 0.0, -1.0]).unwrap(), 0.7, epsilon = 1e-12);
        let bad = SphereSpec { center_distance: 1.0, center_direction: vec![1.0, 0.0], radius: 1.0 };
        assert!(matches!(bad.radial_function(&[1.0, 0.0]), Err(Error::NotStarShaped(_))));
    }

    #[test]
    fn sphere_points_are_equidistant_from_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = SphereSpec { center_distance: 0.8, center_direction: vec![0.0, 1.0, 0.0], radius: 1.2 };
        let c = AmbientPoint::from_polar(0.8, &[0.0, 1.0, 0.0]).unwrap();
        for _ in 0..100 {
            let theta = random_unit(&mut rng, 3);
            let r = s.radial_function(&theta).unwrap();
            let p = AmbientPoint::from_polar(r, &theta).unwrap();
            assert!((p.distance(&c) - 1.2).abs() < 1e-12);
        }
    }
}
