//! Spectral bases for radius functions on `S^1` and `S^2` with analytic
//! derivatives up to second order.
//!
//! `S^1`: coefficient 0 is the constant, `2l - 1` is `cos(lφ)`, `2l` is
//! `sin(lφ)`. `S^2`: real spherical harmonics normalized to mean square one
//! (`Y_0^0 = 1`), coefficient `l² + l + m`, with `m >= 0` carrying
//! `cos(mφ)` and `m < 0` carrying `sin(|m|φ)`.

/// Number of coefficients for band limit `l_max`.
pub fn basis_len(dim: usize, l_max: usize) -> usize {
    match dim {
        2 => 2 * l_max + 1,
        _ => (l_max + 1) * (l_max + 1),
    }
}

/// Coefficient slot of a signed Fourier mode (`l < 0` is a sine).
pub fn fourier_index(l: i64) -> usize {
    match l {
        0 => 0,
        l if l > 0 => (2 * l - 1) as usize,
        l => (-2 * l) as usize,
    }
}

/// Signed Fourier mode of a coefficient slot.
pub fn fourier_mode(index: usize) -> i64 {
    match index {
        0 => 0,
        i if i % 2 == 1 => ((i + 1) / 2) as i64,
        i => -((i / 2) as i64),
    }
}

pub fn harmonic_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// `(l, m)` of a spherical-harmonic coefficient slot.
pub fn harmonic_mode(index: usize) -> (usize, i64) {
    let l = (index as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= index { l + 1 } else { l };
    (l, index as i64 - (l * l + l) as i64)
}

/// Polynomial degree of basis function `index` (used for quadrature limits).
pub fn degree(dim: usize, index: usize) -> usize {
    match dim {
        2 => fourier_mode(index).unsigned_abs() as usize,
        _ => harmonic_mode(index).0,
    }
}

/// Values and coordinate derivatives of every basis function at one point.
///
/// Derivative slots follow the chart: `[φ]` on `S^1`, `[ϑ, φ]` on `S^2`.
#[derive(Debug, Clone)]
pub struct BasisJet {
    pub value: Vec<f64>,
    pub first: [Vec<f64>; 2],
    /// `second[0] = ∂_00`, `second[1] = ∂_01`, `second[2] = ∂_11`.
    pub second: [Vec<f64>; 3],
}

/// Fully normalized associated Legendre functions `P̄_l^m(cos ϑ)` and their
/// first two `ϑ`-derivatives, indexed `[l][m]` for `m <= l`.
pub struct LegendreTable {
    pub p: Vec<Vec<f64>>,
    pub dp: Vec<Vec<f64>>,
    pub ddp: Vec<Vec<f64>>,
}

impl LegendreTable {
    /// Requires `0 < ϑ < π`.
    pub fn new(l_max: usize, polar: f64) -> Self {
        let (s, c) = polar.sin_cos();
        let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
        p[0][0] = 1.0;
        for m in 1..=l_max {
            let f = if m == 1 {
                3.0f64.sqrt()
            } else {
                ((2 * m + 1) as f64 / (2 * m) as f64).sqrt()
            };
            p[m][m] = f * s * p[m - 1][m - 1];
        }
        for m in 0..l_max {
            p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * c * p[m][m];
        }
        for m in 0..=l_max {
            for l in (m + 2)..=l_max {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                p[l][m] = a * (c * p[l - 1][m] - b * p[l - 2][m]);
            }
        }
        let mut dp = vec![vec![0.0; l_max + 1]; l_max + 1];
        let mut ddp = vec![vec![0.0; l_max + 1]; l_max + 1];
        for l in 0..=l_max {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                let lower = if l > m {
                    ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[l - 1][m]
                } else {
                    0.0
                };
                dp[l][m] = (lf * c * p[l][m] - lower) / s;
                ddp[l][m] =
                    -c / s * dp[l][m] - (lf * (lf + 1.0) - mf * mf / (s * s)) * p[l][m];
            }
        }
        Self { p, dp, ddp }
    }
}

/// Jet of the `S^1` Fourier basis at azimuth `φ`.
pub fn fourier_jet(l_max: usize, phi: f64) -> BasisJet {
    let n = basis_len(2, l_max);
    let mut value = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    value[0] = 1.0;
    for l in 1..=l_max {
        let lf = l as f64;
        let (s, c) = (lf * phi).sin_cos();
        let (ic, is) = (2 * l - 1, 2 * l);
        value[ic] = c;
        value[is] = s;
        d1[ic] = -lf * s;
        d1[is] = lf * c;
        d2[ic] = -lf * lf * c;
        d2[is] = -lf * lf * s;
    }
    BasisJet {
        value,
        first: [d1, vec![0.0; n]],
        second: [d2, vec![0.0; n], vec![0.0; n]],
    }
}

/// Jet of the `S^2` harmonic basis from a precomputed Legendre table.
pub fn harmonic_jet(l_max: usize, legendre: &LegendreTable, phi: f64) -> BasisJet {
    let n = basis_len(3, l_max);
    let mut value = vec![0.0; n];
    let mut dt = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    let mut dtt = vec![0.0; n];
    let mut dtp = vec![0.0; n];
    let mut dpp = vec![0.0; n];
    for l in 0..=l_max {
        for m in 0..=l {
            let (p, dp, ddp) = (legendre.p[l][m], legendre.dp[l][m], legendre.ddp[l][m]);
            let mf = m as f64;
            let (s, c) = (mf * phi).sin_cos();
            let ic = harmonic_index(l, m as i64);
            value[ic] = p * c;
            dt[ic] = dp * c;
            dtt[ic] = ddp * c;
            dphi[ic] = -mf * p * s;
            dtp[ic] = -mf * dp * s;
            dpp[ic] = -mf * mf * p * c;
            if m > 0 {
                let is = harmonic_index(l, -(m as i64));
                value[is] = p * s;
                dt[is] = dp * s;
                dtt[is] = ddp * s;
                dphi[is] = mf * p * c;
                dtp[is] = mf * dp * c;
                dpp[is] = -mf * mf * p * s;
            }
        }
    }
    BasisJet {
        value,
        first: [dt, dphi],
        second: [dtt, dtp, dpp],
    }
}

/// Jet at chart coordinates `angles` (`[φ, _]` on `S^1`, `[ϑ, φ]` on `S^2`).
pub fn jet_at(dim: usize, l_max: usize, angles: [f64; 2]) -> BasisJet {
    match dim {
        2 => fourier_jet(l_max, angles[0]),
        _ => harmonic_jet(l_max, &LegendreTable::new(l_max, angles[0]), angles[1]),
    }
}
