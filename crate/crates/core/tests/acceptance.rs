//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use weighted_curvature::ambient::SphereSpec;
use weighted_curvature::functionals::{
    check_heintze_karcher, check_minkowski_pointwise, check_weighted_minkowski_inequality,
    evaluate_functionals, pointwise_minkowski_residual, Tolerances, Verdict,
};
use weighted_curvature::rigidity::{run_probe, ProbeConfig, ProbeVerdict};
use weighted_curvature::scenario::{reference_resolution, run_scenario, RunOptions, Scenario};
use weighted_curvature::surface::{build_geometry, oracle_shape_operator, QuadratureGrid, RadialShape};
use weighted_curvature::symm::{binomial, garding_membership, newton_maclaurin_check, sigma_k, PrincipalTuple};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: String) -> Outcome {
    Outcome { pass, summary }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sphere_area(dim: usize, rho: f64) -> f64 {
    match dim {
        2 => 2.0 * PI * rho.sinh(),
        _ => 4.0 * PI * rho.sinh().powi(2),
    }
}

/// Random (n-1)-convex perturbed sphere.
fn random_shape(rng: &mut ChaCha8Rng, dim: usize) -> RadialShape {
    let max_l = if dim == 2 { 6 } else { 4 };
    loop {
        let rho: f64 = rng.gen_range(0.5..2.0);
        let amplitude = rng.gen_range(0.02..0.15) * rho.min(1.0);
        let l = rng.gen_range(2..=max_l);
        if let Ok(shape) = RadialShape::perturb_sphere(dim, rho, amplitude, rng.gen(), l) {
            return shape;
        }
    }
}

fn grid(dim: usize, resolution: usize) -> QuadratureGrid {
    QuadratureGrid::for_resolution(dim, resolution).unwrap()
}

fn reference_grid(shape: &RadialShape) -> QuadratureGrid {
    grid(shape.dim(), reference_resolution(shape.dim(), shape.band_limit()))
}

fn sphere_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for dim in [2usize, 3] {
        let m = dim - 1;
        for rho in [0.5, 1.0, 2.0] {
            let shape = RadialShape::centered_sphere(dim, rho).unwrap();
            let geo = build_geometry(&shape, &grid(dim, 8)).unwrap();
            let (c, s, coth) = (rho.cosh(), rho.sinh(), 1.0 / rho.tanh());
            for sample in geo.samples() {
                worst = worst.max(rel(sample.potential, c)).max(rel(sample.support, s));
                for &l in sample.principal.values() {
                    worst = worst.max(rel(l, coth));
                }
            }
            let a = sphere_area(dim, rho);
            worst = worst.max(rel(geo.area(), a));
            let t = evaluate_functionals(&geo, m).unwrap();
            for k in 0..=m {
                let hk = coth.powi(k as i32);
                worst = worst
                    .max(rel(t.v_h[k], a * c * hk))
                    .max(rel(t.p_h[k], a * s * hk))
                    .max(rel(t.v2_h[k], a * c * c * hk))
                    .max(rel(t.p_v_h[k], a * s * c * hk));
                if k >= 1 {
                    worst = worst.max(t.gradient_term[k].unwrap().abs() / a);
                    worst = worst.max(rel(t.v_pow[k].unwrap(), a * c.powf(1.0 + 1.0 / k as f64)));
                }
            }
            worst = worst.max(rel(t.p, a * s)).max(rel(t.v_over_h1.unwrap(), a * c / coth));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(5),
        format!("max relative error {worst:.2e} over rho in {{0.5, 1, 2}}, n in {{2, 3}} ({elapsed:.2?})"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let steps = [0.02, 0.01, 0.005];
    let mut min_order = f64::INFINITY;
    let mut worst_fine = 0.0f64;
    let mut shapes = 0;
    for (dim, seed) in [(2usize, 101u64), (3, 102), (3, 103)] {
        let shape = RadialShape::perturb_sphere(dim, 1.0, 0.1, seed, 4).unwrap();
        let geo = build_geometry(&shape, &grid(dim, 12)).unwrap();
        let nodes: Vec<_> = geo
            .samples()
            .iter()
            .filter(|s| dim == 2 || (s.angles[0] > 0.1 && s.angles[0] < PI - 0.1))
            .step_by(5)
            .collect();
        let sup = |h: f64| {
            nodes
                .iter()
                .map(|s| (oracle_shape_operator(&shape, s.angles, h).unwrap() - s.shape_operator.mixed()).amax())
                .fold(0.0f64, f64::max)
        };
        let errors: Vec<f64> = steps.iter().map(|&h| sup(h)).collect();
        for w in errors.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
        worst_fine = worst_fine.max(sup(1e-3));
        shapes += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        min_order >= 1.9 && worst_fine < 1e-4 && elapsed < Duration::from_secs(30),
        format!(
            "{shapes} shapes, L = 4: min observed order {min_order:.3}, sup error at h = 1e-3 {worst_fine:.2e} ({elapsed:.2?})"
        ),
    )
}

/// Relative residuals of the two integral identities for every `k` at one
/// resolution: `(minkowski, weighted)`.
fn identity_residuals(shape: &RadialShape, resolution: usize) -> Vec<(f64, f64)> {
    let geo = build_geometry(shape, &grid(shape.dim(), resolution)).unwrap();
    let m = shape.surface_dim();
    let t = evaluate_functionals(&geo, m).unwrap();
    (1..=m)
        .map(|k| {
            (
                rel(t.p_h[k], t.v_h[k - 1]),
                rel(t.p_v_h[k], t.v2_h[k - 1] + t.gradient_term[k].unwrap()),
            )
        })
        .collect()
}

const DECAY_FLOOR: f64 = 1e-12;

/// Doubling ladder from the coarsest admissible grid up to the reference
/// resolution, with the smallest decay factor seen above the floor.
fn ladder(shape: &RadialShape, pick: fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let reference = reference_resolution(shape.dim(), shape.band_limit());
    let mut resolutions = vec![2 * shape.band_limit() + 2];
    while *resolutions.last().unwrap() * 2 < reference {
        resolutions.push(resolutions.last().unwrap() * 2);
    }
    resolutions.push(reference);
    let residuals: Vec<Vec<f64>> = resolutions
        .iter()
        .map(|&r| identity_residuals(shape, r).iter().map(pick).collect())
        .collect();
    let mut min_decay = f64::INFINITY;
    for (w, r) in residuals.windows(2).zip(resolutions.windows(2)) {
        if r[1] != 2 * r[0] {
            continue;
        }
        for (a, b) in w[0].iter().zip(&w[1]) {
            if *a > 10.0 * DECAY_FLOOR && *b > DECAY_FLOOR {
                min_decay = min_decay.min(a / b);
            }
        }
    }
    let at_reference = residuals.last().unwrap().iter().fold(0.0f64, |m, v| m.max(*v));
    (at_reference, min_decay)
}

fn identity_shapes() -> Vec<RadialShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..10).map(|i| random_shape(&mut rng, 2 + i % 2)).collect()
}

fn integral_identity(shapes: &[RadialShape], pick: fn(&(f64, f64)) -> f64) -> (f64, f64, Duration) {
    let start = Instant::now();
    let results: Vec<(f64, f64)> = shapes.par_iter().map(|s| ladder(s, pick)).collect();
    let worst = results.iter().fold(0.0f64, |m, r| m.max(r.0));
    let decay = results.iter().fold(f64::INFINITY, |m, r| m.min(r.1));
    (worst, decay, start.elapsed())
}

fn minkowski_integral(shapes: &[RadialShape]) -> Outcome {
    let (worst, decay, elapsed) = integral_identity(shapes, |r| r.0);
    outcome(
        worst < 1e-8 && decay >= 10.0 && elapsed < Duration::from_secs(60),
        format!(
            "{} shapes: max relative residual {worst:.2e} at reference resolution, min decay per doubling {decay:.1} ({elapsed:.2?})",
            shapes.len()
        ),
    )
}

fn weighted_identity(shapes: &[RadialShape]) -> Outcome {
    let (worst, decay, elapsed) = integral_identity(shapes, |r| r.1);
    let min_grad = shapes
        .par_iter()
        .map(|s| {
            let geo = build_geometry(s, &reference_grid(s)).unwrap();
            let t = evaluate_functionals(&geo, s.surface_dim()).unwrap();
            assert_eq!(t.convexity, s.surface_dim());
            (1..=s.surface_dim()).map(|k| t.gradient_term[k].unwrap()).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    outcome(
        worst < 1e-8 && decay >= 10.0 && min_grad >= -1e-12 && elapsed < Duration::from_secs(60),
        format!(
            "{} shapes: max relative residual {worst:.2e}, min decay per doubling {decay:.1}, min gradient term {min_grad:.3e} ({elapsed:.2?})",
            shapes.len()
        ),
    )
}

fn hundred_shapes() -> Vec<RadialShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..100).map(|i| random_shape(&mut rng, 2 + i % 2)).collect()
}

fn off_center_sphere(dim: usize, d: f64) -> RadialShape {
    let mut direction = vec![0.0; dim];
    direction[0] = 0.6;
    direction[1] = 0.8;
    let spec = SphereSpec {
        center_distance: d,
        center_direction: direction,
        radius: 1.0,
    };
    RadialShape::sphere(dim, &spec, if dim == 2 { 40 } else { 20 }).unwrap()
}

fn centered_spheres() -> Vec<RadialShape> {
    [2usize, 3]
        .iter()
        .flat_map(|&dim| [0.5, 1.0, 2.0].map(|rho| RadialShape::centered_sphere(dim, rho).unwrap()))
        .collect()
}

fn weighted_inequality(shapes: &[RadialShape]) -> Outcome {
    let tol = Tolerances::default();
    let min_margin = shapes
        .par_iter()
        .map(|s| {
            let geo = build_geometry(s, &reference_grid(s)).unwrap();
            let t = evaluate_functionals(&geo, s.surface_dim()).unwrap();
            (1..=s.surface_dim())
                .map(|k| {
                    let e = check_weighted_minkowski_inequality(&t, k, &tol).unwrap();
                    if e.verdict == Verdict::Fail { f64::NEG_INFINITY } else { e.relative_residual }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);

    let centered_equal = centered_spheres().iter().all(|s| {
        let t = evaluate_functionals(&build_geometry(s, &grid(s.dim(), 8)).unwrap(), s.surface_dim()).unwrap();
        (1..=s.surface_dim())
            .all(|k| check_weighted_minkowski_inequality(&t, k, &tol).unwrap().verdict == Verdict::EqualityDetected)
    });

    let mut off_margin = f64::INFINITY;
    let mut off_hk_equal = true;
    for dim in [2usize, 3] {
        let s = off_center_sphere(dim, 0.3);
        let t = evaluate_functionals(&build_geometry(&s, &reference_grid(&s)).unwrap(), dim - 1).unwrap();
        for k in 1..dim {
            let e = check_weighted_minkowski_inequality(&t, k, &tol).unwrap();
            if e.verdict != Verdict::Pass {
                off_margin = f64::NEG_INFINITY;
            }
            off_margin = off_margin.min(e.relative_residual);
        }
        off_hk_equal &= check_heintze_karcher(&t, &tol).verdict == Verdict::EqualityDetected;
    }
    outcome(
        min_margin >= -1e-10 && centered_equal && off_margin > tol.equality && off_hk_equal,
        format!(
            "min relative margin {min_margin:.3e} on {} shapes; centered spheres equal: {centered_equal}; off-center d = 0.3 margin {off_margin:.3e} with Heintze-Karcher equality: {off_hk_equal}",
            shapes.len()
        ),
    )
}

fn heintze_karcher(shapes: &[RadialShape]) -> Outcome {
    let tol = Tolerances::default();
    let min_margin = shapes
        .par_iter()
        .map(|s| {
            let geo = build_geometry(s, &reference_grid(s)).unwrap();
            let e = check_heintze_karcher(&evaluate_functionals(&geo, s.surface_dim()).unwrap(), &tol);
            if e.verdict == Verdict::Fail { f64::NEG_INFINITY } else { e.relative_residual }
        })
        .reduce(|| f64::INFINITY, f64::min);
    let mut spheres = centered_spheres();
    spheres.push(off_center_sphere(2, 0.3));
    spheres.push(off_center_sphere(3, 0.3));
    let worst_equality = spheres
        .par_iter()
        .map(|s| {
            let geo = build_geometry(s, &reference_grid(s)).unwrap();
            let e = check_heintze_karcher(&evaluate_functionals(&geo, s.surface_dim()).unwrap(), &tol);
            if e.verdict == Verdict::EqualityDetected { e.relative_residual.abs() } else { f64::INFINITY }
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        min_margin >= -1e-10 && worst_equality < 1e-8,
        format!(
            "min relative margin {min_margin:.3e} on {} shapes; worst equality residual {worst_equality:.2e} on {} spheres",
            shapes.len(),
            spheres.len()
        ),
    )
}

fn subset_sigma(values: &[f64], k: usize) -> f64 {
    let m = values.len();
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).product::<f64>())
        .sum()
}

fn newton_maclaurin() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_margin = f64::INFINITY;
    let mut tuples = 0;
    while tuples < 10_000 {
        let m = rng.gen_range(2..=6);
        let k = rng.gen_range(2..=m);
        let j = rng.gen_range(1..k);
        let center: f64 = rng.gen_range(-0.5..3.0);
        let width: f64 = if rng.gen_bool(0.1) { 1e-6 } else { rng.gen_range(0.1..3.0) };
        let values: Vec<f64> = (0..m).map(|_| center + width * rng.gen_range(-1.0..1.0)).collect();
        let lambda = PrincipalTuple::new(values).unwrap();
        if !garding_membership(&lambda, k).unwrap() {
            continue;
        }
        min_margin = min_margin.min(newton_maclaurin_check(&lambda, j, k).unwrap());
        tuples += 1;
    }
    let mut worst_sigma = 0.0f64;
    for _ in 0..2_000 {
        let m = rng.gen_range(1..=8);
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let scale: f64 = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let lambda = PrincipalTuple::new(values.clone()).unwrap();
        for k in 0..=m {
            let err = (sigma_k(&lambda, k).unwrap() - subset_sigma(&values, k)).abs()
                / (binomial(m, k) * scale.powi(k as i32));
            worst_sigma = worst_sigma.max(err);
        }
    }
    outcome(
        min_margin >= -1e-12 && worst_sigma < 1e-13,
        format!("min margin {min_margin:.3e} over {tuples} cone tuples (m <= 6); sigma_k vs subset enumeration (m <= 8) {worst_sigma:.2e}"),
    )
}

fn pointwise_identity() -> Outcome {
    let mut sphere_sup = 0.0f64;
    for s in centered_spheres() {
        let g = grid(s.dim(), 12);
        let geo = build_geometry(&s, &g).unwrap();
        for k in 1..s.dim() {
            sphere_sup = sphere_sup.max(pointwise_minkowski_residual(&geo, &g, k).unwrap().sup);
        }
    }
    let tol = Tolerances::default();
    // the azimuthal divergence telescopes at any resolution, so curves are
    // taken on their coarsest grids; on S^2 the polar flux must be resolved
    let mut shapes: Vec<(RadialShape, usize)> = hundred_shapes()
        .into_iter()
        .take(20)
        .enumerate()
        .map(|(i, s)| {
            let resolution = match s.dim() {
                2 => 2 * s.band_limit() + 2 + 2 * (i % 4),
                _ => reference_resolution(3, s.band_limit()),
            };
            (s, resolution)
        })
        .collect();
    // mean curvature changes sign on this curve
    let mut coeffs = vec![0.0; 11];
    coeffs[0] = 1.0;
    coeffs[9] = 0.25;
    shapes.push((RadialShape::new(2, 5, coeffs).unwrap(), 24));
    // saddle-shaped band around the equator; its curvature needs a finer grid
    let mut coeffs = vec![0.0; 25];
    coeffs[0] = 1.0;
    coeffs[20] = 0.07;
    let bumpy = RadialShape::new(3, 4, coeffs).unwrap();
    let g = grid(3, 96);
    let nonconvex = evaluate_functionals(&build_geometry(&bumpy, &g).unwrap(), 2).unwrap().convexity < 2;
    shapes.push((bumpy, 96));
    let worst_consistency = shapes
        .par_iter()
        .map(|(s, resolution)| {
            let g = grid(s.dim(), *resolution);
            let geo = build_geometry(s, &g).unwrap();
            let t = evaluate_functionals(&geo, s.surface_dim()).unwrap();
            (1..s.dim())
                .map(|k| {
                    let e = &check_minkowski_pointwise(&geo, &g, &t, k, &tol).unwrap()[1];
                    e.relative_residual.abs()
                })
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        sphere_sup < 1e-10 && worst_consistency < 1e-10 && nonconvex,
        format!(
            "sup residual on spheres {sphere_sup:.2e}; integrated pointwise vs integral residual {worst_consistency:.2e} on {} shapes including two that are not 2-convex",
            shapes.len()
        ),
    )
}

fn rigidity_probes() -> Outcome {
    let cases = [(2usize, 1usize, 0usize), (3, 1, 0), (3, 2, 0), (3, 2, 1)];
    let mut runs = Vec::new();
    for &(dim, k, j) in &cases {
        let l = if dim == 2 { 6 } else { 4 };
        for seed in 1..=5u64 {
            let shape = RadialShape::perturb_sphere(dim, 1.0, 0.1, seed, l).unwrap();
            runs.push((format!("n={dim} k={k} j={j} seed {seed}"), ProbeConfig::new(&shape, k, j)));
        }
        let mut direction = vec![0.0; dim];
        direction[0] = 1.0;
        let spec = SphereSpec {
            center_distance: 0.2,
            center_direction: direction,
            radius: 1.0,
        };
        let shape = RadialShape::sphere(dim, &spec, l).unwrap();
        runs.push((format!("n={dim} k={k} j={j} off-center"), ProbeConfig::new(&shape, k, j)));
    }
    let results: Vec<_> = runs
        .par_iter()
        .map(|(label, config)| (label, run_probe(config).unwrap()))
        .collect();
    let mut failures = Vec::new();
    let (mut max_j, mut max_spread, mut max_evals, mut max_time) = (0.0f64, 0.0f64, 0, Duration::ZERO);
    for (label, r) in &results {
        max_j = max_j.max(r.variance);
        max_spread = max_spread.max(r.radius_spread);
        max_evals = max_evals.max(r.evaluations);
        max_time = max_time.max(r.elapsed);
        let ok = r.verdict == ProbeVerdict::SphereReached
            && r.variance < 1e-8
            && r.radius_spread < 1e-3
            && r.evaluations <= 10_000
            && r.elapsed < Duration::from_secs(300);
        if !ok {
            failures.push(label.as_str());
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{}/{} runs reached the sphere; max J {max_j:.2e}, max std(r)/mean(r) {max_spread:.2e}, max evaluations {max_evals}, slowest run {max_time:.2?}{}",
            results.len() - failures.len(),
            results.len(),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn determinism() -> Outcome {
    let scenario = Scenario::from_json(
        r#"{"schema": 1, "name": "determinism", "dimension": 3, "seed": 21,
            "shape": {"kind": "perturbed", "radius": 1.2, "amplitude": 0.1, "band_limit": 4}}"#,
    )
    .unwrap();
    let reports: Vec<_> = (0..2)
        .map(|_| run_scenario(&scenario, &RunOptions::default()).unwrap())
        .collect();
    let json_equal = reports[0].to_json().unwrap() == reports[1].to_json().unwrap();
    let csv_equal = reports[0].to_csv() == reports[1].to_csv();
    let shape = RadialShape::perturb_sphere(2, 1.0, 0.1, 9, 6).unwrap();
    let probes: Vec<String> = (0..2)
        .map(|_| serde_json::to_string(&run_probe(&ProbeConfig::new(&shape, 1, 0)).unwrap()).unwrap())
        .collect();
    let probe_equal = probes[0] == probes[1];
    outcome(
        json_equal && csv_equal && probe_equal,
        format!("report JSON identical: {json_equal}, CSV identical: {csv_equal}, probe result identical: {probe_equal}"),
    )
}

fn main() -> ExitCode {
    let identity = identity_shapes();
    let hundred = hundred_shapes();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("sphere closed forms", Box::new(sphere_closed_forms)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("integral Minkowski identity", Box::new(|| minkowski_integral(&identity))),
        ("weighted Minkowski identity", Box::new(|| weighted_identity(&identity))),
        ("weighted Minkowski inequality", Box::new(|| weighted_inequality(&hundred))),
        ("Heintze-Karcher inequality", Box::new(|| heintze_karcher(&hundred))),
        ("Newton-Maclaurin inequality", Box::new(newton_maclaurin)),
        ("pointwise Minkowski identity", Box::new(pointwise_identity)),
        ("rigidity probes", Box::new(rigidity_probes)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.summary);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
