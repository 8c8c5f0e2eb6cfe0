use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_kepler-euler");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env_remove("KEPLER_EULER_OUT_DIR").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_all_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--c=-0.5", "--all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c["pass"] == true));
    let names: Vec<&str> = checks.iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["adapted", "beltrami", "contact", "curvature", "divergence", "equivariance"]);
    for c in checks {
        for key in ["check", "regime_c", "samples", "max_residual", "tolerance", "pass", "notes"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert!(v["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn verify_curvature_in_the_hyperbolic_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--c=0.3", "--which=curvature"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rep = &v["checks"][0];
    assert_eq!(rep["check"], "curvature");
    assert!(rep["details"]["gauss_curvature.statistic"].as_f64().unwrap() < 1e-8);
    assert!(rep["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify", "--c=abc"][..],
        &["verify"],
        &["verify", "--c=1", "--which=curl"],
        &["simulate", "--c=-0.5"],
        &["simulate", "--c=-0.5", "--state", "0", "0", "0", "--tmax", "-1"],
        &["frobnicate"],
    ] {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn circular_orbit_csv_starts_at_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let (x1, x2, a) = ("0.1", "-0.9", "0.7");
    let out = run(dir.path(), &["simulate", "--c=-0.5", "--state", x1, x2, a, "--tmax", "1", "--output", "orbit.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,alpha"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(first, [0.0, 0.1, -0.9, 0.7]);
    let fields: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    // 17 significant digits
    assert!(fields.iter().all(|f| f.trim_start_matches('-').split('e').next().unwrap().len() == 18), "{fields:?}");
    let side = read_json(&dir.path().join("orbit.json"));
    assert_eq!(side["mode"], "bundle");
    assert!(side["energy_drift"].as_f64().unwrap() < 1e-9);
}

#[test]
fn detect_period_finds_the_circular_period() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate", "--c=-0.5", "--q", "1", "0", "--p", "0", "1", "--tmax", "7", "--detect-period"]);
    assert_eq!(out.status.code(), Some(0));
    let side = read_json(&dir.path().join("trajectory.json"));
    let period = side["orbit"]["classification"]["Periodic"]["period"].as_f64().unwrap();
    assert!((period - std::f64::consts::TAU).abs() < 1e-6, "{period}");
}

#[test]
fn direct_collision_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate", "--direct", "--q", "1", "0", "--p", "0", "0", "--output", "fall.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let side = read_json(&dir.path().join("fall.json"));
    assert_eq!(side["error"]["name"], "Collision");
    let t = side["orbit"]["classification"]["Collision"]["time"].as_f64().unwrap();
    // radial fall from rest at r = 1 reaches the origin at π/(2√2)
    let exact = std::f64::consts::PI / 8f64.sqrt();
    assert!(t.is_finite() && t > 0.0 && t <= exact, "{t}");
    let csv = std::fs::read_to_string(dir.path().join("fall.csv")).unwrap();
    assert!(csv.starts_with("t,q1,q2,p1,p2\n"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn compare_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["compare", "--c=-0.5", "--q", "1", "0", "--p", "0", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["report"]["details"]["hausdorff"].as_f64().unwrap() < 1e-5);
    assert_eq!(v["report"]["details"]["windowed"], 0.0);

    std::fs::write(dir.path().join("near.json"), r#"{"compare": {"integrator": {"collision_radius": 0.01}, "tmax": 3.0}}"#).unwrap();
    let out = run(dir.path(), &["--config", "near.json", "compare", "--c=-0.995", "--q", "1", "0", "--p", "0", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["report"]["details"]["windowed"], 1.0);

    let out = run(dir.path(), &["compare", "--c=-0.4", "--q", "1", "0", "--p", "0", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EnergyMismatch"));
}

#[test]
fn bundle_state_from_phase_must_match_the_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate", "--c=-0.3", "--q", "1", "0", "--p", "0", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["simulate", "--c=0.3", "--state", "1.0", "0.5", "1.0", "--tmax", "2", "--detect-period"];
    for d in [&a, &b] {
        assert_eq!(run(d.path(), &args).status.code(), Some(0));
    }
    for f in ["trajectory.csv", "trajectory.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let verify = ["verify", "--c=1", "--which=beltrami,contact", "--samples", "50", "--seed", "7"];
    assert_eq!(run(a.path(), &verify).stdout, run(b.path(), &verify).stdout);
}

#[test]
fn config_file_values_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"verify": {"c": 1.0, "which": ["divergence"], "suite": {"samples": 17}}}"#).unwrap();
    let v = json(&run(dir.path(), &["--config", "run.json", "verify"]));
    assert_eq!(v["checks"][0]["samples"], 17);
    assert_eq!(v["config"]["c"], 1.0);
    let v = json(&run(dir.path(), &["--config", "run.json", "verify", "--samples", "9", "--c=0"]));
    assert_eq!(v["checks"][0]["samples"], 9);
    assert_eq!(v["checks"][0]["regime_c"], 0.0);

    std::fs::write(dir.path().join("bad.json"), r#"{"verify": {"sample": 3}}"#).unwrap();
    assert_eq!(run(dir.path(), &["--config", "bad.json", "verify", "--c=1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["--config", "missing.json", "verify", "--c=1"]).status.code(), Some(2));
}

#[test]
fn output_directory_from_flag_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out_env = dir.path().join("env");
    let out = Command::new(BIN)
        .args(["simulate", "--c=1", "--state", "2", "0", "0", "--tmax", "0.5"])
        .current_dir(dir.path())
        .env("KEPLER_EULER_OUT_DIR", &out_env)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_env.join("trajectory.csv").exists() && out_env.join("trajectory.json").exists());

    let out = Command::new(BIN)
        .args(["--out-dir", "flag", "verify", "--c=1", "--which=contact", "--samples", "5", "--output", "v.json"])
        .current_dir(dir.path())
        .env("KEPLER_EULER_OUT_DIR", &out_env)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("flag/v.json").exists());
    assert!(!out_env.join("v.json").exists());
}

#[test]
fn average_metric_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["average-metric", "--c=-0.5", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["checks"][0]["check"], "haar_average");
    assert!(v["checks"][0]["details"]["before_averaging"].as_f64().unwrap() > 1e-3);

    let cls = |drift: &str| {
        let out = run(dir.path(), &["classify", "--c=-0.5", "--state", "0.2", "-0.4", "1", "--fiber-drift", drift]);
        assert_eq!(out.status.code(), Some(0));
        json(&out)["classification"]["class"].as_str().unwrap().to_string()
    };
    assert_eq!(cls("0"), "Horizontal");
    assert_eq!(cls("0.3"), "Oblique");

    run(dir.path(), &["simulate", "--c=-0.5", "--state", "0.2", "-0.4", "1", "--tmax", "1", "--max-step", "5e-4"]);
    let side = read_json(&dir.path().join("trajectory.json"));
    assert_eq!(side["geodesic"]["class"], "Horizontal");
    let out = run(dir.path(), &["classify", "--c=-0.5", "--input", "trajectory.csv"]);
    assert_eq!(json(&out)["classification"]["class"], "Horizontal");
}
