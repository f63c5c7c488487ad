//! Product quadrature on `S^1` and `S^2`, and spectral differentiation of
//! node fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::basis::LegendreTable;
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes descending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// One quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    /// Chart coordinates: `[φ, 0]` on `S^1`, `[ϑ, φ]` on `S^2`.
    pub angles: [f64; 2],
    /// Unit vector in `R^n`.
    pub theta: Vec<f64>,
    /// Round-metric quadrature weight.
    pub weight: f64,
}

/// Resolution request, serialized in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    /// `N` nodes on `S^1`; `N` Gauss–Legendre rings × `2N` azimuths on `S^2`.
    pub resolution: usize,
}

/// Tensor-product grid on the unit sphere `S^{n-1}`, ring-major node order.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    dim: usize,
    n_polar: usize,
    n_azimuth: usize,
    polar: Vec<f64>,
    nodes: Vec<GridNode>,
}

impl QuadratureGrid {
    /// Uniform periodic grid with `n` nodes on `S^1`.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("circle grid needs >= 3 nodes, got {n}")));
        }
        let w = 2.0 * PI / n as f64;
        let nodes = (0..n)
            .map(|j| {
                let phi = w * j as f64;
                GridNode {
                    angles: [phi, 0.0],
                    theta: vec![phi.cos(), phi.sin()],
                    weight: w,
                }
            })
            .collect();
        Ok(Self {
            dim: 2,
            n_polar: 1,
            n_azimuth: n,
            polar: vec![],
            nodes,
        })
    }

    /// Gauss–Legendre in `cos ϑ` × uniform in `φ` on `S^2`. Poles are never nodes.
    pub fn sphere(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || n_azimuth < 3 {
            return Err(Error::Config(format!(
                "sphere grid too coarse: {n_polar} x {n_azimuth}"
            )));
        }
        let (x, w) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let polar: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        for (i, &t) in polar.iter().enumerate() {
            let (st, ct) = t.sin_cos();
            for j in 0..n_azimuth {
                let phi = dphi * j as f64;
                nodes.push(GridNode {
                    angles: [t, phi],
                    theta: vec![st * phi.cos(), st * phi.sin(), ct],
                    weight: w[i] * dphi,
                });
            }
        }
        Ok(Self {
            dim: 3,
            n_polar,
            n_azimuth,
            polar,
            nodes,
        })
    }

    /// `N` nodes on `S^1`, or `N × 2N` on `S^2`.
    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        match spec.dimension {
            2 => Self::circle(spec.resolution),
            3 => Self::sphere(spec.resolution, 2 * spec.resolution),
            d => Err(Error::Config(format!("unsupported ambient dimension {d}"))),
        }
    }

    pub fn for_resolution(dim: usize, resolution: usize) -> Result<Self> {
        Self::from_spec(GridSpec {
            dimension: dim,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Resolution in the sense of [`GridSpec::resolution`].
    pub fn resolution(&self) -> usize {
        match self.dim {
            2 => self.n_azimuth,
            _ => self.n_polar,
        }
    }

    pub fn n_polar(&self) -> usize {
        self.n_polar
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn polar_angles(&self) -> &[f64] {
        &self.polar
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest band limit whose shapes this grid resolves (`N >= 2L + 2`).
    pub fn max_band_limit(&self) -> usize {
        (self.resolution().saturating_sub(2)) / 2
    }

    /// Round-metric integral of a node field.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.nodes.iter().zip(field).map(|(n, f)| n.weight * f).sum()
    }

    /// `∂_φ` of a node field, exact for trigonometric polynomials below
    /// the ring Nyquist frequency.
    pub fn d_azimuth(&self, field: &[f64]) -> Vec<f64> {
        let n = self.n_azimuth;
        let mut out = vec![0.0; field.len()];
        let cutoff = (n - 1) / 2;
        let table: Vec<(f64, f64)> = (0..n)
            .map(|j| (2.0 * PI * j as f64 / n as f64).sin_cos())
            .collect();
        for (ring, chunk) in field.chunks(n).enumerate() {
            let dst = &mut out[ring * n..(ring + 1) * n];
            for m in 1..=cutoff {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, f) in chunk.iter().enumerate() {
                    let (s, c) = table[(m * j) % n];
                    a += f * c;
                    b += f * s;
                }
                a *= 2.0 / n as f64;
                b *= 2.0 / n as f64;
                let mf = m as f64;
                for (j, d) in dst.iter_mut().enumerate() {
                    let (s, c) = table[(m * j) % n];
                    *d += mf * (b * c - a * s);
                }
            }
        }
        out
    }

    /// `∂_ϑ` of a node field on `S^2` through a spherical-harmonic
    /// projection of the highest degree the grid integrates exactly.
    pub fn d_polar(&self, field: &[f64]) -> Result<Vec<f64>> {
        if self.dim != 3 {
            return Err(Error::Domain("polar derivative exists only on S^2".into()));
        }
        let (np, na) = (self.n_polar, self.n_azimuth);
        let l_max = (np - 1).min((na - 1) / 2);
        let (_, gw) = gauss_legendre(np);
        let tables: Vec<LegendreTable> =
            self.polar.iter().map(|&t| LegendreTable::new(l_max, t)).collect();
        let trig: Vec<(f64, f64)> = (0..na)
            .map(|j| (2.0 * PI * j as f64 / na as f64).sin_cos())
            .collect();
        // ring Fourier integrals ∫ f cos(mφ) dφ, ∫ f sin(mφ) dφ
        let dphi = 2.0 * PI / na as f64;
        let mut ring_cos = vec![vec![0.0; l_max + 1]; np];
        let mut ring_sin = vec![vec![0.0; l_max + 1]; np];
        for i in 0..np {
            let row = &field[i * na..(i + 1) * na];
            for m in 0..=l_max {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, f) in row.iter().enumerate() {
                    let (s, c) = trig[(m * j) % na];
                    a += f * c;
                    b += f * s;
                }
                ring_cos[i][m] = a * dphi;
                ring_sin[i][m] = b * dphi;
            }
        }
        let mut out = vec![0.0; field.len()];
        for m in 0..=l_max {
            // per-ring derivative amplitudes of cos(mφ) and sin(mφ)
            let mut amp_c = vec![0.0; np];
            let mut amp_s = vec![0.0; np];
            for l in m..=l_max {
                let (mut cc, mut cs) = (0.0, 0.0);
                for i in 0..np {
                    let p = tables[i].p[l][m];
                    cc += gw[i] * p * ring_cos[i][m];
                    cs += gw[i] * p * ring_sin[i][m];
                }
                cc /= 4.0 * PI;
                cs /= 4.0 * PI;
                for i in 0..np {
                    let dp = tables[i].dp[l][m];
                    amp_c[i] += cc * dp;
                    amp_s[i] += cs * dp;
                }
            }
            for i in 0..np {
                for j in 0..na {
                    let (s, c) = trig[(m * j) % na];
                    out[i * na + j] += amp_c[i] * c + if m > 0 { amp_s[i] * s } else { 0.0 };
                }
            }
        }
        Ok(out)
    }
}
