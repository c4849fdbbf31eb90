use std::path::Path;
use std::process::{Command, Output};

use bmvsim::config::REFERENCE_CONFIG;

const BIN: &str = env!("CARGO_BIN_EXE_bmvsim");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_bundled_config() {
    let out = run(&["simulate", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rc = doc["relative_correction"].as_f64().unwrap();
    assert!(rc.abs() <= 3.3e-6);
    assert!(doc["relative_correction_error"].as_f64().unwrap() > 0.0);
    for key in ["phases_free", "phases_pend", "delta_phi_free", "v_free", "v_pend", "visibility_bound", "regime"] {
        assert!(!doc[key].is_null(), "missing {key}");
    }
}

#[test]
fn zero_center_separation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &REFERENCE_CONFIG.replace("center_separation = 2e-4", "center_separation = 0.0"));
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("center_separation"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &REFERENCE_CONFIG.replace("length = 0.5", "length = 0.5\nlenght = 0.4"));
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lenght"), "{}", stderr(&out));
}

#[test]
fn zero_acceleration_runs_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &REFERENCE_CONFIG.replace("target_separation = 1e-4", "spin_acceleration = 0.0"),
    );
    let out = run(&["simulate", "--config", &cfg, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["delta_phi_free"].as_f64(), Some(0.0));
    assert!(doc["negativity_pend"].as_f64().unwrap().abs() < 1e-15);
}

#[test]
fn grid_cap_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &REFERENCE_CONFIG.replace("max_points = 1000000", "max_points = 5"));
    let out = run(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("6 points"), "{}", stderr(&out));
}

#[test]
fn csv_and_json_sweeps_agree() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv").display().to_string();
    let json_path = dir.path().join("out.json").display().to_string();
    assert!(run(&["sweep", "--format", "csv", "--output", &csv_path]).status.success());
    assert!(run(&["sweep", "--format", "json", "--output", &json_path]).status.success());

    let csv_text = std::fs::read_to_string(&csv_path).unwrap();
    let json: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(json.len(), 6);
    for (row, obj) in rows.iter().zip(&json) {
        assert_eq!(obj.keys().collect::<Vec<_>>(), header.iter().collect::<Vec<_>>());
        for (cell, key) in row.split(',').zip(&header) {
            match &obj[*key] {
                serde_json::Value::Number(n) => assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{key}"),
                serde_json::Value::String(s) => assert_eq!(cell, s),
                serde_json::Value::Null => assert!(cell.is_empty()),
                other => panic!("unexpected {other}"),
            }
        }
    }
}

#[test]
fn time_sweep_correction_grows_quadratically() {
    let out = run(&["sweep", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (t_col, l_col, rc_col) = (col("interferometer.total_time"), col("pendulum.length"), col("relative_correction"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    for length in [0.25, 0.5] {
        let series: Vec<(f64, f64)> =
            rows.iter().filter(|r| r[l_col] == length).map(|r| (r[t_col], r[rc_col].abs())).collect();
        assert!(series.windows(2).all(|w| w[1].1 > w[0].1));
        let (t0, r0) = series[0];
        for &(t, r) in &series[1..] {
            assert!(((r / r0) / (t / t0).powi(2) - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn tampered_gravitational_constant_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &REFERENCE_CONFIG.replace("gravitational_constant = 6.674e-11", "gravitational_constant = 6.674e-10"),
    );
    let out = run(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().any(|l| l.starts_with("5c") && l.ends_with("FAIL")), "{table}");
}

#[test]
fn loosened_quadrature_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &REFERENCE_CONFIG.replace("quad_rel_tol = 1e-10", "quad_rel_tol = 1e-2"));
    let out = run(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(
        table.lines().any(|l| l.starts_with("2d") && l.contains("quadrature error") && l.ends_with("FAIL")),
        "{table}"
    );
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["verify", "--output", &path.display().to_string()]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 18);
}

#[test]
fn strict_profile_runs() {
    let out = run(&["simulate", "--tolerance-profile", "strict", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn config_round_trip_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let effective = bmvsim::RunConfig::reference().to_toml_string().unwrap();
    let cfg = write_config(dir.path(), &effective);
    let a = run(&["simulate", "--format", "csv"]);
    let b = run(&["simulate", "--format", "csv", "--config", &cfg]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = run(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
}
