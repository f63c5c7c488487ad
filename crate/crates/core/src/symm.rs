//! Elementary symmetric functions of principal curvatures.
//!
//! Everything here works on a single point of a hypersurface: a tuple of
//! principal curvatures, or the mixed-index shape operator `b^i_j` together
//! with the metric that makes it self-adjoint. Tensors are stored with one
//! upper and one lower index; raising and lowering is the caller's job.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative spread below which a tuple is treated as umbilic.
pub const UMBILIC_SPREAD_TOL: f64 = 1e-8;

/// Binomial coefficient `C(m, k)` as a float.
pub fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Principal curvatures at one point, `m = n - 1` of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalTuple(Vec<f64>);

impl PrincipalTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("principal tuple must be non-empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite principal curvature {v}")));
        }
        Ok(Self(values))
    }

    pub fn constant(value: f64, m: usize) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// All of `σ_0 ..= σ_upto` in one pass.
    ///
    /// Accumulates the coefficients of `Π (1 + λ_i t)`; each new factor
    /// updates the coefficient list from the top down.
    pub fn sigmas(&self, upto: usize) -> Result<Vec<f64>> {
        let m = self.dim();
        if upto > m {
            return Err(Error::Domain(format!("k = {upto} exceeds dimension {m}")));
        }
        let mut e = vec![0.0; upto + 1];
        e[0] = 1.0;
        for (i, &lambda) in self.0.iter().enumerate() {
            let top = (i + 1).min(upto);
            for j in (1..=top).rev() {
                e[j] += lambda * e[j - 1];
            }
        }
        Ok(e)
    }

    /// Normalized `H_0 ..= H_upto`.
    pub fn normalized_all(&self, upto: usize) -> Result<Vec<f64>> {
        let m = self.dim();
        let mut e = self.sigmas(upto)?;
        for (k, v) in e.iter_mut().enumerate() {
            *v /= binomial(m, k);
        }
        Ok(e)
    }

    /// `max |λ_i - λ_j| / (1 + |mean λ|)`.
    pub fn relative_spread(&self) -> f64 {
        let (lo, hi) = self
            .0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let mean = self.0.iter().sum::<f64>() / self.dim() as f64;
        (hi - lo) / (1.0 + mean.abs())
    }

    pub fn is_umbilic(&self) -> bool {
        self.relative_spread() < UMBILIC_SPREAD_TOL
    }
}

/// k-th elementary symmetric polynomial of the tuple; `σ_0 = 1`.
pub fn sigma_k(lambda: &PrincipalTuple, k: usize) -> Result<f64> {
    Ok(lambda.sigmas(k)?[k])
}

/// `H_k = σ_k / C(m, k)`, with `H_0 = 1`.
pub fn normalized_hk(lambda: &PrincipalTuple, k: usize) -> Result<f64> {
    Ok(sigma_k(lambda, k)? / binomial(lambda.dim(), k))
}

/// True iff `σ_j(λ) > 0` for every `1 <= j <= k`. No tolerance is applied.
pub fn garding_membership(lambda: &PrincipalTuple, k: usize) -> Result<bool> {
    let m = lambda.dim();
    if k == 0 || k > m {
        return Err(Error::Domain(format!(
            "cone index k = {k} must lie in 1..={m}"
        )));
    }
    let s = lambda.sigmas(k)?;
    Ok(s[1..].iter().all(|&v| v > 0.0))
}

/// Signed margin `H_j - H_k^{j/k}` of the Newton–Maclaurin inequality.
///
/// Requires `1 <= j < k <= m` and `λ ∈ Γ_k`.
pub fn newton_maclaurin_check(lambda: &PrincipalTuple, j: usize, k: usize) -> Result<f64> {
    let m = lambda.dim();
    if j == 0 || j >= k || k > m {
        return Err(Error::Domain(format!(
            "Newton-Maclaurin needs 1 <= j < k <= m, got j = {j}, k = {k}, m = {m}"
        )));
    }
    if !garding_membership(lambda, k)? {
        return Err(Error::Precondition(format!(
            "tuple {:?} is not in the Garding cone of order {k}",
            lambda.values()
        )));
    }
    let h = lambda.normalized_all(k)?;
    Ok(h[j] - h[k].powf(j as f64 / k as f64))
}

/// Mixed-index shape operator `B = g⁻¹ h` together with the metric that
/// makes it self-adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMatrix {
    mixed: DMatrix<f64>,
    metric: DMatrix<f64>,
}

impl ShapeMatrix {
    /// Wraps a symmetric matrix; the metric is the identity.
    pub fn symmetric(b: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() || b.nrows() == 0 {
            return Err(Error::Domain("shape matrix must be square and non-empty".into()));
        }
        let asym = (&b - b.transpose()).amax();
        if asym > 1e-12 * (1.0 + b.amax()) {
            return Err(Error::Domain(format!(
                "matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        let m = b.nrows();
        Ok(Self {
            mixed: b,
            metric: DMatrix::identity(m, m),
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::symmetric(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            values,
        )))
    }

    /// Builds `B = g⁻¹ h` from the first and second fundamental forms.
    pub fn from_forms(metric: DMatrix<f64>, second: DMatrix<f64>) -> Result<Self> {
        let m = metric.nrows();
        if !metric.is_square() || second.shape() != (m, m) || m == 0 {
            return Err(Error::Domain("fundamental forms must be square of equal size".into()));
        }
        let chol = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Degenerate("metric is not positive definite".into()))?;
        let mixed = chol.solve(&second);
        Ok(Self { mixed, metric })
    }

    /// Wraps an already-mixed operator that is self-adjoint w.r.t. `metric`.
    pub fn from_mixed(mixed: DMatrix<f64>, metric: DMatrix<f64>) -> Result<Self> {
        let lowered = &metric * &mixed;
        let asym = (&lowered - lowered.transpose()).amax();
        if asym > 1e-10 * (1.0 + lowered.amax()) {
            return Err(Error::Domain(format!(
                "operator is not self-adjoint w.r.t. the metric (asymmetry {asym:e})"
            )));
        }
        if metric.clone().cholesky().is_none() {
            return Err(Error::Degenerate("metric is not positive definite".into()));
        }
        Ok(Self { mixed, metric })
    }

    pub fn dim(&self) -> usize {
        self.mixed.nrows()
    }

    pub fn mixed(&self) -> &DMatrix<f64> {
        &self.mixed
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// Real eigenvalues, ascending, from the symmetrized operator
    /// `L⁻¹ (g B) L⁻ᵀ` with `g = L Lᵀ`.
    pub fn eigenvalues(&self) -> Result<PrincipalTuple> {
        PrincipalTuple::new(self_adjoint_eigenvalues(&self.mixed, &self.metric)?)
    }

    /// `σ_k(B)` from the characteristic polynomial (Newton's identities),
    /// independent of any eigensolver.
    pub fn sigma(&self, k: usize) -> Result<f64> {
        let m = self.dim();
        if k > m {
            return Err(Error::Domain(format!("k = {k} exceeds dimension {m}")));
        }
        Ok(self.leverrier(k).0)
    }

    /// Returns `(σ_k, T_{k-1})` built by `T_j = σ_j I - B T_{j-1}`,
    /// `σ_j = tr(B T_{j-1}) / j`.
    fn leverrier(&self, k: usize) -> (f64, DMatrix<f64>) {
        let m = self.dim();
        let id = DMatrix::<f64>::identity(m, m);
        let mut t = id.clone();
        let mut sigma = 1.0;
        for j in 1..=k {
            let bt = &self.mixed * &t;
            sigma = bt.trace() / j as f64;
            if j < k {
                t = &id * sigma - bt;
            }
        }
        (sigma, t)
    }
}

/// Eigenvalues of an operator that is self-adjoint with respect to `metric`.
pub(crate) fn self_adjoint_eigenvalues(
    mixed: &DMatrix<f64>,
    metric: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let chol = metric
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("metric is not positive definite".into()))?;
    let l = chol.l();
    let lowered = metric * mixed;
    let lowered = (&lowered + lowered.transpose()) * 0.5;
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular Cholesky factor".into()))?;
    let sym = &linv * lowered * linv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

/// Value of the k-th Newton transformation at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTensorValue {
    pub order: usize,
    /// Mixed-index entries `(T_k)^i_j`.
    pub entries: DMatrix<f64>,
    metric: DMatrix<f64>,
}

impl NewtonTensorValue {
    /// Fully raised form `T^{ij} = T^i_l g^{lj}`.
    pub fn raised(&self) -> Result<DMatrix<f64>> {
        let ginv = self
            .metric
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("metric is singular".into()))?;
        Ok(&self.entries * ginv)
    }

    /// Eigenvalues of `T_k` as a self-adjoint operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self_adjoint_eigenvalues(&self.entries, &self.metric)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }
}

/// `T_k(B)` via `T_k = σ_k(B) I - B T_{k-1}`, `T_0 = I`.
///
/// Entry `(T_k)^i_j` equals `∂σ_{k+1} / ∂b^j_i`.
pub fn newton_tensor(b: &ShapeMatrix, k: usize) -> Result<NewtonTensorValue> {
    let m = b.dim();
    if k >= m {
        return Err(Error::Domain(format!(
            "Newton tensor order k = {k} must lie in 0..={}",
            m - 1
        )));
    }
    let (_, t) = b.leverrier(k + 1);
    Ok(NewtonTensorValue {
        order: k,
        entries: t,
        metric: b.metric.clone(),
    })
}
