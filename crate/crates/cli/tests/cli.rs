use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wcurv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcurv"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn wcurv")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SPHERE: &str = r#"{"schema": 1, "name": "Unit Sphere", "dimension": 3,
  "shape": {"kind": "sphere", "radius": 1.0}}"#;

#[test]
fn sphere_verify_reports_equalities_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("s.json"), SPHERE).unwrap();
    let out = wcurv(&["verify", "--config", "s.json", "--out", "out"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json = fs::read_to_string(dir.path().join("out/unit_sphere.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let verdict = |name: &str| {
        checks
            .iter()
            .filter(|c| c["name"] == name)
            .map(|c| c["verdict"].as_str().unwrap().to_owned())
            .collect::<Vec<_>>()
    };
    assert!(verdict("heintze_karcher").iter().all(|v| v == "equality_detected"));
    assert_eq!(verdict("weighted_minkowski_inequality").len(), 2);
    assert!(checks.iter().all(|c| c["verdict"] != "fail"));
    let csv = fs::read_to_string(dir.path().join("out/unit_sphere.csv")).unwrap();
    assert!(csv.starts_with("name,k,j,lhs,rhs,residual,rel_residual,tolerance,verdict\n"));
    assert_eq!(csv.lines().count(), checks.len() + 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"schema": 1, "name": "bumpy", "dimension": 2, "seed": 11,
            "shape": {"kind": "perturbed", "radius": 0.8, "amplitude": 0.1, "band_limit": 5}}"#,
    )
    .unwrap();
    let a = wcurv(&["verify", "--config", "p.json", "--out", "a", "--quiet"], dir.path());
    let b = wcurv(&["verify", "--config", "p.json", "--out", "b", "--quiet"], dir.path());
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    assert!(a.stdout.is_empty());
    for file in ["bumpy.json", "bumpy.csv"] {
        let x = fs::read(dir.path().join("a").join(file)).unwrap();
        let y = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn configuration_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("k.json"),
        r#"{"schema": 1, "name": "x", "dimension": 3, "k": [3],
            "shape": {"kind": "sphere", "radius": 1.0}}"#,
    )
    .unwrap();
    let out = wcurv(&["verify", "--config", "k.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("k = 3"), "{}", stderr(&out));

    fs::write(dir.path().join("broken.json"), "{\"schema\": 1,\n \"name\": \"x\",,\n}").unwrap();
    let out = wcurv(&["verify", "--config", "broken.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = wcurv(&["verify", "--config", "missing.json"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn a_failing_check_exits_two() {
    // a coarse grid on a rough curve leaves the pointwise residual far above tolerance
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"schema": 1, "name": "rough", "dimension": 2, "seed": 1,
            "checks": ["minkowski_pointwise"],
            "shape": {"kind": "perturbed", "radius": 1.0, "amplitude": 0.05, "band_limit": 20}}"#,
    )
    .unwrap();
    let out = wcurv(&["verify", "--config", "c.json", "--resolution", "42", "--quiet"], dir.path());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(dir.path().join("rough.json").exists());
}

#[test]
fn make_shape_round_trips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let out = wcurv(
        &[
            "make-shape", "--dimension", "3", "--radius", "1.3", "--amplitude", "0.2",
            "--band-limit", "6", "--seed", "5", "--name", "blob", "--out", "shapes",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("shapes/blob.json")).unwrap();
    let file: weighted_curvature::surface::ShapeFile = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&file).unwrap() + "\n";
    assert_eq!(text, again);

    let expected = weighted_curvature::surface::RadialShape::perturb_sphere(3, 1.3, 0.2, 5, 6).unwrap();
    let loaded = weighted_curvature::surface::RadialShape::from_file(&file).unwrap();
    assert_eq!(
        loaded.coeffs().iter().map(|c| c.to_bits()).collect::<Vec<_>>(),
        expected.coeffs().iter().map(|c| c.to_bits()).collect::<Vec<_>>()
    );

    let out = wcurv(
        &["make-shape", "--dimension", "2", "--radius", "1.0", "--center-distance", "0.3",
          "--center-direction", "1,0", "--band-limit", "24", "--out", "shapes"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("shapes/shape.json").exists());

    let out = wcurv(&["make-shape", "--dimension", "2", "--radius=-1"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn probe_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let base = r#""schema": 1, "dimension": 2, "k": 1, "seed": 2,
        "initial": {"kind": "perturbed", "radius": 1.0, "amplitude": 0.1, "band_limit": 6}"#;
    fs::write(dir.path().join("ok.json"), format!(r#"{{"name": "ok", {base}}}"#)).unwrap();
    fs::write(
        dir.path().join("short.json"),
        format!(r#"{{"name": "short", {base}, "optimizer": {{"max_evaluations": 15}}}}"#),
    )
    .unwrap();
    fs::write(
        dir.path().join("neg.json"),
        r#"{"schema": 1, "name": "neg", "dimension": 2, "k": 1,
            "initial": {"kind": "sphere", "radius": -1.0}}"#,
    )
    .unwrap();

    let out = wcurv(&["probe", "--config", "ok.json", "--out", "p"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("SphereReached"));
    let result: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p/ok_probe.json")).unwrap()).unwrap();
    assert_eq!(result["verdict"], "sphere_reached");
    let history = fs::read_to_string(dir.path().join("p/ok_history.csv")).unwrap();
    assert!(history.lines().count() > 2);

    let out = wcurv(&["probe", "--config", "short.json", "--out", "p"], dir.path());
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let out = wcurv(&["probe", "--config", "neg.json", "--out", "p"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn convergence_writes_a_table() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("s.json"), SPHERE).unwrap();
    let out = wcurv(
        &["convergence", "--config", "s.json", "--resolutions", "8,16", "--quiet"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("unit_sphere_convergence.csv")).unwrap();
    assert!(csv.starts_with("resolution,check,k,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);

    let out = wcurv(&["convergence", "--config", "s.json"], dir.path());
    assert_eq!(code(&out), 1);
}
