use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cylradon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylradon"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("CYLRADON_THREADS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// `(a, b, re, im)` rows of an output CSV.
fn rows(path: &Path) -> Vec<[f64; 4]> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn forward_of_the_constant_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"phantom": "const:1", "sphere_grid": {"n_theta": 8, "n_rho": 8, "rho_min": 0, "rho_max": 1.5}}"#,
    );
    let out = cylradon(dir.path(), &["forward", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = dir.path().join("forward.csv");
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .starts_with("theta,rho,re,im\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 64);
    assert!(r
        .iter()
        .all(|row| (row[2] - 1.0).abs() < 1e-12 && row[3] == 0.0));
}

#[test]
fn forward_of_odd_phantom_vanishes() {
    let dir = TempDir::new().unwrap();
    assert!(cylradon(dir.path(), &["forward", "--phantom", "odd"])
        .status
        .success());
    assert!(rows(&dir.path().join("forward.csv"))
        .iter()
        .all(|row| row[2].abs() < 1e-12));
}

#[test]
fn forward_gaussian_value_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"phantom": "gauss0", "reference": "gauss0", "sphere_grid": {"n_theta": 4, "n_rho": 1, "rho_min": 0.7853981633974483, "rho_max": 0.7853981633974483}}"#,
    );
    assert!(cylradon(
        dir.path(),
        &["forward", "--config", &cfg, "--quad-nodes", "128"]
    )
    .status
    .success());
    let r = rows(&dir.path().join("forward.csv"));
    assert!((r[0][2] - 0.6450353).abs() < 1e-4, "{:?}", r[0]);
    let meta = json(&dir.path().join("forward.json"));
    assert_eq!(meta["version"], "0.1.0");
    assert_eq!(meta["source"], "gauss0");
    assert_eq!(meta["kind"], "sphere");
    assert_eq!(meta["quadrature"]["n_angular"], 128);
    assert_eq!(meta["grid"][0]["count"], 4);
    let metrics = json(&dir.path().join("forward.metrics.json"));
    assert!(metrics["rel_l2"].as_f64().unwrap() < 1e-4);
}

#[test]
fn output_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        assert!(
            cylradon(dir.path(), &["forward", "--phantom", "bump", "--seed", "7"])
                .status
                .success()
        );
    }
    let single = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cylradon"))
        .args(["forward", "--phantom", "bump", "--seed", "7", "--out"])
        .arg(single.path())
        .env("CYLRADON_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let read = |d: &TempDir| fs::read(d.path().join("forward.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&single));
}

#[test]
fn invert_of_forward_reconstructs() {
    let dir = TempDir::new().unwrap();
    assert!(cylradon(dir.path(), &["forward", "--phantom", "gauss2"])
        .status
        .success());
    let sino = dir.path().join("forward.csv");
    let out = cylradon(
        dir.path(),
        &[
            "invert",
            "--input",
            sino.to_str().unwrap(),
            "--reference",
            "gauss2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let metrics = json(&dir.path().join("invert.metrics.json"));
    assert!(metrics["rel_l2"].as_f64().unwrap() < 1e-2, "{metrics}");
    assert!(fs::read_to_string(dir.path().join("invert.csv"))
        .unwrap()
        .starts_with("s,t,re,im\n"));
    assert_eq!(json(&dir.path().join("invert.json"))["modes"], 8);
}

#[test]
fn dual_of_the_constant_sphere() {
    let dir = TempDir::new().unwrap();
    assert!(cylradon(
        dir.path(),
        &[
            "dual",
            "--phantom",
            "const-sphere:1",
            "--reference",
            "const-sphere:1"
        ]
    )
    .status
    .success());
    let r = rows(&dir.path().join("dual.csv"));
    let at_zero = r.iter().find(|row| row[1] == 0.0).unwrap();
    assert!((at_zero[2] - std::f64::consts::FRAC_2_PI).abs() < 1e-6);
    assert!(
        json(&dir.path().join("dual.metrics.json"))["max_abs_error"]
            .as_f64()
            .unwrap()
            < 1e-4
    );
}

#[test]
fn dualinvert_recovers_the_constant() {
    let dir = TempDir::new().unwrap();
    let out = cylradon(dir.path(), &["dualinvert", "--phantom", "const-sphere:1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = rows(&dir.path().join("dualinvert.csv"));
    assert!(!r.is_empty());
    assert!(r.iter().all(|row| (row[2] - 1.0).abs() < 1e-3), "{r:?}");
}

#[test]
fn check_suites_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = cylradon(dir.path(), &["check", "cormack", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 9);
    let report = json(&dir.path().join("check.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["suite"], "cormack");

    assert_eq!(cylradon(dir.path(), &["check", ""]).status.code(), Some(2));
    assert_eq!(
        cylradon(dir.path(), &["check", "everything"]).status.code(),
        Some(2)
    );
    assert_eq!(cylradon(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cylradon(dir.path(), &["forward"]).status.code(), Some(2));
    assert_eq!(
        cylradon(dir.path(), &["forward", "--phantom", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cylradon(
            dir.path(),
            &["forward", "--config", "/nonexistent/config.json"]
        )
        .status
        .code(),
        Some(2)
    );
    let cfg = write_config(dir.path(), r#"{"phantom": "gauss0", "unknown_key": 1}"#);
    assert_eq!(
        cylradon(dir.path(), &["forward", "--config", &cfg])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "theta,rho,re,im\n0,0,oops,0\n").unwrap();
    assert_eq!(
        cylradon(dir.path(), &["invert", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let out = Command::new(env!("CARGO_BIN_EXE_cylradon"))
        .args(["forward", "--phantom", "gauss0", "--out"])
        .arg(dir.path())
        .env("CYLRADON_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"phantom": "gauss2", "quadrature": {"strict": true, "tail_tol": 1e-30}}"#,
    );
    let out = cylradon(dir.path(), &["invert", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.path().join("invert.csv").exists());
}
