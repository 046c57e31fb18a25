use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn superosc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superosc"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUPEROSC_MAX_DIGITS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_point_norm_is_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"nodes": [0.0], "targets": {"kind": "ones"}}}"#,
    );
    let o = superosc(&["construct", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(dir.path());
    let ns = r["report"]["outputs"]["norm_sq"].as_f64().unwrap();
    assert!((ns - std::f64::consts::PI).abs() < 1e-12, "{ns}");
    // complex numbers serialize as [re, im]
    let lam = &r["report"]["lambdas"][0];
    assert!((lam[0].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(lam[1].as_f64().unwrap(), 0.0);
}

#[test]
fn non_increasing_nodes_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"problem": {"nodes": [-1.0, 0.5, 0.2], "targets": {"kind": "ones"}}}"#,
    );
    let o = superosc(&["construct", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("problem.nodes[2]"), "{}", stderr(&o));
}

#[test]
fn wrong_type_reports_json_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"physical": {"hbar": "one", "p_max": 1, "slit_width": 6}}"#,
    );
    let o = superosc(&["construct", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("physical.hbar"), "{}", stderr(&o));
}

#[test]
fn unknown_experiment_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = superosc(&["experiment", "no-such-thing"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exhausted_precision_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"problem": {"count": 15}}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_superosc"))
        .args(["experiment", "amp-match", "--config", &cfg])
        .current_dir(dir.path())
        .env("SUPEROSC_MAX_DIGITS", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(
        e.contains("PrecisionExhausted") || e.contains("NotPositiveDefinite"),
        "{e}"
    );
}

#[test]
fn amp_match_defaults_reproduce_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = superosc(&["experiment", "amp-match"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = report(dir.path());
    let out = &first["report"]["outputs"];
    let pm = out["p_mean"].as_f64().unwrap();
    let ps = out["p_std"].as_f64().unwrap();
    assert!((1.90..=1.94).contains(&pm), "{pm}");
    assert!((1.39..=1.45).contains(&ps), "{ps}");

    for name in ["position.csv", "momentum.csv"] {
        let mut rdr = csv::Reader::from_path(dir.path().join(name)).unwrap();
        let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(&header[1..], ["re", "im", "abs2"]);
        let axis: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
        assert_eq!(axis.len(), 2001);
        let h = axis[1] - axis[0];
        for w in axis.windows(2) {
            assert!(w[1] > w[0]);
            assert!(((w[1] - w[0]) - h).abs() < 1e-9 * h.abs().max(1.0));
        }
    }

    // feed the written report back in as the config
    let again = tempfile::tempdir().unwrap();
    let prev = dir.path().join("report.json");
    let o = superosc(
        &["experiment", "amp-match", "--config", prev.to_str().unwrap()],
        again.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let second = report(again.path());
    assert_eq!(first["config"], second["config"]);
    assert_eq!(first["report"]["outputs"], second["report"]["outputs"]);
}

#[test]
fn cost_sweep_reports_positive_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = superosc(&["experiment", "cost-sweep", "--out", "sweep"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep/report.json")).unwrap()).unwrap();
    let sweep = &r["sweep"];
    assert_eq!(sweep["points"].as_array().unwrap().len(), 10);
    assert!(sweep["trend"]["log_norm_sq_slope"].as_f64().unwrap() > 0.0);
    assert!(sweep["quadratic_fit"]["fit_residual"].as_f64().unwrap() < 1e-9);
    assert!(dir.path().join("sweep/sweep.csv").exists());
}

#[test]
fn sweep_failures_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    // a narrow slit cannot hold the larger node sets
    let cfg = write_config(
        dir.path(),
        r#"{"physical": {"hbar": 1, "p_max": 1, "slit_width": 4.0}, "sweep": {"n_min": 2, "n_max": 5}}"#,
    );
    let o = superosc(&["experiment", "cost-sweep", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let pts = report(dir.path())["sweep"]["points"].as_array().unwrap().clone();
    assert_eq!(pts.len(), 4);
    assert!(pts[0]["error"].is_null());
    assert_eq!(pts[3]["error"][0], "InvalidConstraints");
}

#[test]
fn extreme_defaults_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = superosc(&["experiment", "extreme", "--digits", "40"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(dir.path());
    assert_eq!(r["config"]["solver"]["start_digits"], 40);
    assert!(r["report"]["outputs"]["eigen_identity_error"].as_f64().unwrap() < 1e-8);
}
