//! Unconstrained minimizers used by the probe: an adaptive Nelder–Mead
//! simplex with restarts, and BFGS on central-difference gradients.
//!
//! Objectives return a value plus an opaque payload that is carried along
//! with the best point so callers can log statistics without re-evaluating.

use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct Settings {
    pub max_evaluations: usize,
    /// Stop as soon as the best value drops below this.
    pub target: f64,
    /// Initial simplex edge, or FD step for the gradient method.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub x: Vec<f64>,
    pub value: f64,
    pub payload: T,
    pub evaluations: usize,
    pub iterations: usize,
    pub reached_target: bool,
}

/// Best point after each iteration: `(iteration, evaluations, value, payload)`.
pub type Trace<T> = Vec<(usize, usize, f64, T)>;

struct Counter<'a, F> {
    f: &'a F,
    count: usize,
}

impl<'a, F, T> Counter<'a, F>
where
    F: Fn(&[f64]) -> (f64, T) + Sync,
    T: Send,
{
    fn one(&mut self, x: &[f64]) -> (f64, T) {
        self.count += 1;
        (self.f)(x)
    }

    fn many(&mut self, xs: &[Vec<f64>]) -> Vec<(f64, T)> {
        self.count += xs.len();
        xs.par_iter().map(|x| (self.f)(x)).collect()
    }
}

fn sort_simplex<T>(simplex: &mut [(Vec<f64>, f64, T)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Nelder–Mead with dimension-adaptive coefficients. When the simplex
/// collapses before the target is met it is rebuilt around the best vertex
/// with an edge proportional to the distance travelled by the last run.
pub fn nelder_mead<F, T>(f: &F, x0: &[f64], settings: &Settings) -> (Outcome<T>, Trace<T>)
where
    F: Fn(&[f64]) -> (f64, T) + Sync,
    T: Clone + Send,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut counter = Counter { f, count: 0 };
    let mut trace = Trace::new();
    let mut iterations = 0;

    let build = |center: &[f64], edge: f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let mut v = center.to_vec();
                v[i] += edge;
                v
            })
            .collect()
    };
    let (v0, p0) = counter.one(x0);
    let mut best = (x0.to_vec(), v0, p0);
    trace.push((0, counter.count, best.1, best.2.clone()));
    let mut edge = settings.step;

    'restart: while counter.count < settings.max_evaluations && best.1 >= settings.target && n > 0 {
        let start = best.0.clone();
        let vertices = build(&start, edge);
        let values = counter.many(&vertices);
        let mut simplex: Vec<(Vec<f64>, f64, T)> = vec![best.clone()];
        simplex.extend(vertices.into_iter().zip(values).map(|(x, (v, p))| (x, v, p)));
        sort_simplex(&mut simplex);

        loop {
            iterations += 1;
            if simplex[0].1 < best.1 {
                best = simplex[0].clone();
            }
            trace.push((iterations, counter.count, best.1, best.2.clone()));
            if best.1 < settings.target || counter.count >= settings.max_evaluations {
                break 'restart;
            }
            let spread = simplex[1..]
                .iter()
                .flat_map(|v| v.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            let value_gap = simplex[n].1 - simplex[0].1;
            if spread < 1e-14 * (1.0 + start.iter().fold(0.0f64, |m, v| m.max(v.abs())))
                || value_gap <= settings.target * 1e-3
            {
                let travelled = start
                    .iter()
                    .zip(&best.0)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                edge = (0.5 * travelled).max(spread * 10.0).max(1e-12);
                continue 'restart;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|i| simplex[..n].iter().map(|v| v.0[i]).sum::<f64>() / nf)
                .collect();
            let worst = simplex[n].0.clone();
            let reflected = affine(&centroid, &worst, -alpha);
            let (fr, pr) = counter.one(&reflected);
            if fr < simplex[0].1 {
                let expanded = affine(&centroid, &worst, -alpha * beta);
                let (fe, pe) = counter.one(&expanded);
                simplex[n] = if fe < fr { (expanded, fe, pe) } else { (reflected, fr, pr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (reflected, fr, pr);
            } else {
                let outside = fr < simplex[n].1;
                let contracted = if outside {
                    affine(&centroid, &reflected, gamma)
                } else {
                    affine(&centroid, &worst, gamma)
                };
                let (fc, pc) = counter.one(&contracted);
                let accept = if outside { fc <= fr } else { fc < simplex[n].1 };
                if accept {
                    simplex[n] = (contracted, fc, pc);
                } else {
                    let anchor = simplex[0].0.clone();
                    let shrunk: Vec<Vec<f64>> = simplex[1..]
                        .iter()
                        .map(|v| affine(&anchor, &v.0, delta))
                        .collect();
                    let values = counter.many(&shrunk);
                    for (slot, (x, (v, p))) in simplex[1..].iter_mut().zip(shrunk.into_iter().zip(values)) {
                        *slot = (x, v, p);
                    }
                }
            }
            sort_simplex(&mut simplex);
        }
    }
    let reached_target = best.1 < settings.target;
    (
        Outcome {
            x: best.0,
            value: best.1,
            payload: best.2,
            evaluations: counter.count,
            iterations,
            reached_target,
        },
        trace,
    )
}

/// BFGS with Armijo backtracking on central-difference gradients.
pub fn gradient_descent<F, T>(f: &F, x0: &[f64], settings: &Settings) -> (Outcome<T>, Trace<T>)
where
    F: Fn(&[f64]) -> (f64, T) + Sync,
    T: Clone + Send,
{
    let n = x0.len();
    let h = settings.step;
    let mut counter = Counter { f, count: 0 };
    let mut trace = Trace::new();
    let (v0, p0) = counter.one(x0);
    let mut x = x0.to_vec();
    let (mut fx, mut px) = (v0, p0);
    trace.push((0, counter.count, fx, px.clone()));

    let gradient = |counter: &mut Counter<F>, x: &[f64]| -> Vec<f64> {
        let probes: Vec<Vec<f64>> = (0..n)
            .flat_map(|i| {
                [1.0, -1.0].into_iter().map(move |s| (i, s))
            })
            .map(|(i, s)| {
                let mut p = x.to_vec();
                p[i] += s * h;
                p
            })
            .collect();
        let values = counter.many(&probes);
        (0..n)
            .map(|i| (values[2 * i].0 - values[2 * i + 1].0) / (2.0 * h))
            .collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut inv_hessian = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut g = gradient(&mut counter, &x);
    let mut iterations = 0;
    while fx >= settings.target && counter.count + 2 * n < settings.max_evaluations && n > 0 {
        iterations += 1;
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut dir: Vec<f64> = (-(&inv_hessian * &gv)).iter().copied().collect();
        if dot(&dir, &g) >= 0.0 {
            inv_hessian = nalgebra::DMatrix::identity(n, n);
            dir = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&dir, &g);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let (ft, pt) = counter.one(&trial);
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft, pt));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, p_new)) = accepted else {
            break;
        };
        let g_new = gradient(&mut counter, &x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let sv = nalgebra::DVector::from_column_slice(&s);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let rho = 1.0 / sy;
            let id = nalgebra::DMatrix::<f64>::identity(n, n);
            let left = &id - rho * &sv * yv.transpose();
            let right = &id - rho * &yv * sv.transpose();
            inv_hessian = &left * &inv_hessian * &right + rho * &sv * sv.transpose();
        }
        x = x_new;
        fx = f_new;
        px = p_new;
        g = g_new;
        trace.push((iterations, counter.count, fx, px.clone()));
    }
    let reached_target = fx < settings.target;
    (
        Outcome {
            x,
            value: fx,
            payload: px,
            evaluations: counter.count,
            iterations,
            reached_target,
        },
        trace,
    )
}
