use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rym(args: &[&str], dir: &Path, config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rym"));
    cmd.args(args).arg("--quiet").arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("run.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn fixed_point_converges_at_time_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(&["evolve"], dir.path(), Some("n1 = 16\nn2 = 16\nchern = 1\nperturbation_amplitude = 0.0\n"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["converged"], true);
    assert_eq!(s["final_time"], 0.0);
    let csv = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,volume,r,f,ym_energy,gauge_norm,harm1,harm2,du_norm,da_norm");
    assert_eq!(lines.count(), 1);
}

#[test]
fn short_run_reports_rate_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(
        &["evolve", "--seed", "3"],
        dir.path(),
        Some("n1 = 16\nn2 = 16\nchern = 1\nt_end = 3.0\ndt = 0.005\nperturbation_amplitude = 0.01\n"),
    );
    assert!(out.status.success());
    let s = summary(dir.path());
    assert_eq!(s["config"]["seed"], 3);
    assert!(s["fitted_decay_rate"].as_f64().unwrap() > 0.0);
    assert!(s["spectral_gap"].as_f64().unwrap() > 0.0);
    assert!(s["residuals"]["volume_rel"].as_f64().unwrap() < 1e-8);
    assert!(s["residuals"]["chern_abs"].as_f64().unwrap() < 1e-12);
}

#[test]
fn blowup_exits_nonzero_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(
        &["evolve"],
        dir.path(),
        Some("n1 = 16\nn2 = 16\nchern = 1\ndt = 0.5\nt_end = 50.0\nsample_every = 1\nperturbation_amplitude = 0.1\n"),
    );
    assert!(!out.status.success());
    let s = summary(dir.path());
    assert_eq!(s["status"], "failed");
    assert!(s["failure"].as_str().unwrap().contains("blew up"), "{}", s["failure"]);
    let csv = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(&["evolve"], dir.path(), Some("n1 = 16\nsurfce = \"torus\"\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surfce"));
    let out = rym(&["evolve"], dir.path(), Some("n1 = 15\n"));
    assert!(!out.status.success());
    assert_eq!(summary(dir.path())["status"], "failed");
}

#[test]
fn evolve_refuses_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(&["evolve"], dir.path(), Some("surface = \"sphere\"\n"));
    assert!(!out.status.success());
}

#[test]
fn torus_spectrum_has_three_zero_modes_without_twist() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(&["spectrum"], dir.path(), Some("n1 = 16\nn2 = 16\n"));
    assert!(out.status.success());
    assert_eq!(summary(dir.path())["spectrum"]["zero_dim"], 3);
    let csv = std::fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.starts_with("mode,eigenvalue,multiplicity\n"));
    assert!(csv.contains("\n0:0,0,3\n"));
}

#[test]
fn sphere_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    rym(&["spectrum"], dir.path(), Some("surface = \"sphere\"\nchern = 2\n"));
    let s = summary(dir.path());
    assert_eq!(s["verdict"]["kind"], "unstable");
    assert_eq!(s["verdict"]["value"], 1.0);

    rym(&["spectrum"], dir.path(), Some("surface = \"sphere\"\nchern = 3\n"));
    let s = summary(dir.path());
    assert_eq!(s["verdict"]["kind"], "marginal");
    assert_eq!(s["spectrum"]["zero_dim"], 3);
    assert_eq!(s["bound"]["spectrum_below_minus_delta"], false);

    rym(&["spectrum"], dir.path(), Some("surface = \"sphere\"\nchern = 3\nmodulo_conformal = true\n"));
    let s = summary(dir.path());
    assert_eq!(s["verdict"]["kind"], "stable");
    assert!((s["verdict"]["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(s["bound"]["spectrum_below_minus_delta"], true);
    assert_eq!(s["tail_monotone"], true);
}

#[test]
fn classify_sweep_writes_one_row_per_chern_number() {
    let dir = tempfile::tempdir().unwrap();
    let out = rym(&["classify"], dir.path(), None);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/spectrum.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(&rows[..3], &["0,2,1", "1,1.75,1", "2,1,1"]);
    assert_eq!(rows.len(), 7);
    let s = summary(dir.path());
    assert_eq!(s["classifications"].as_array().unwrap().len(), 7);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = "n1 = 8\nn2 = 8\nchern = 1\n";
    let out = rym(&["verify"], dir.path(), Some(tiny));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(summary(dir.path())["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let out = rym(&["verify", "--debug-flip-coupling"], dir.path(), Some(tiny));
    assert!(!out.status.success());
    let s = summary(dir.path());
    let failed: Vec<&str> = s["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["torus symbols Hermitian"]);
}

#[test]
fn verify_default_grid_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rym"))
        .args(["verify", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 11, "{text}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = "n1 = 16\nn2 = 16\nchern = 2\nt_end = 1.0\nseed = 5\nperturbation_amplitude = 0.02\n";
    rym(&["evolve"], dir.path(), Some(config));
    let first = std::fs::read(dir.path().join("out/diagnostics.csv")).unwrap();
    rym(&["evolve"], dir.path(), Some(config));
    let second = std::fs::read(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(first, second);
}
