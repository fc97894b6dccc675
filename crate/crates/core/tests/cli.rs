use std::path::{Path, PathBuf};
use std::process::Command;

fn mfc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfc"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn short_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = short_scenario(dir.path(), "s.json", r#"{"name": "short", "duration_s": 7200}"#);
    let out = dir.path().join("out");
    let status = mfc()
        .args(["run", s.to_str().unwrap(), "--out", out.to_str().unwrap(), "--estimator", "algebraic"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_s,ti_c,hi_pct,ti_ref_c,hi_ref_pct,te_c,he_pct,rg_wm2,vv_kmh,u_heat,duty_heat,u_fog,duty_fog,f_est_temp,f_est_hygro,beta"
    );
    assert_eq!(lines.count(), 120);

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["estimator"], "algebraic");
    assert!(metrics["temperature"]["variance"].as_f64().unwrap() >= 0.0);
    assert!(metrics["heating_on_time_min"].as_f64().is_some());
    assert_eq!(metrics["scenario"]["name"], "short");

    let pwm = std::fs::read_to_string(out.join("pwm.csv")).unwrap();
    assert_eq!(pwm.lines().count(), 7201);
}

#[test]
fn compare_prints_verdicts() {
    let out = mfc()
        .args([
            "compare",
            scenario("nominal_ip.json").to_str().unwrap(),
            scenario("boolean.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdicts"]["temperature_variance"], "a");
    assert_eq!(v["b"]["controller"], "boolean");
}

#[test]
fn compare_mismatched_duration_fails() {
    let dir = tempfile::tempdir().unwrap();
    let a = short_scenario(dir.path(), "a.json", r#"{"duration_s": 3600, "metrics_from_s": 0}"#);
    let b = short_scenario(dir.path(), "b.json", r#"{"duration_s": 7200}"#);
    let out = mfc().args(["compare", a.to_str().unwrap(), b.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));
}

#[test]
fn estimate_demo_prints_csv() {
    let out = mfc()
        .args(["estimate-demo", scenario("demo_step.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t_s,f_true,f_est_algebraic,f_est_closed_loop\n"));
    assert!(text.lines().count() > 50);
}

#[test]
fn bad_inputs_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = mfc().args(["run", missing.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = short_scenario(dir.path(), "bad.json", r#"{"duration_s": 90}"#);
    let out = mfc().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("control period"));

    let out = mfc().args(["run", bad.to_str().unwrap(), "--estimator", "magic"]).output().unwrap();
    assert!(!out.status.success());
}
