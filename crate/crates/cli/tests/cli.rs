use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nhbath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhbath")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = nhbath(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn dir_arg(dir: &Path) -> String {
    format!("output_dir={}", dir.display())
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn version_is_the_manifest_build_id() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nhbath(&["--version"]);
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap().trim().to_string();
    run_ok(&[
        "spectrum",
        "--set",
        "N=4",
        "--set",
        "t1=1",
        "--set",
        "gamma=1",
        "--set",
        "boundary=open",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["build"].as_str().unwrap(), printed);
}

#[test]
fn heff_at_exceptional_point_is_bidiagonal_with_corner() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("heff.json");
    fs::write(&config, r#"{"N":9,"t1":1,"gamma":2,"boundary":"periodic","g":0.1}"#).unwrap();
    let out_dir = tmp.path().join("out");
    run_ok(&["heff", "--config", config.to_str().unwrap(), "--set", &dir_arg(&out_dir)]);

    let rate = 0.1f64 * 0.1 / 4.0;
    let rows = read_csv(&out_dir.join("heff.csv"));
    assert_eq!(rows.len(), 81);
    for row in rows {
        let (m, n): (usize, usize) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let z = (row[2].parse::<f64>().unwrap(), row[3].parse::<f64>().unwrap());
        let expected = if m == n {
            -rate
        } else if m == n + 1 || (m == 1 && n == 9) {
            rate
        } else {
            0.0
        };
        assert!(z.0.abs() < 1e-12 && (z.1 - expected).abs() < 1e-12 * rate.max(1.0), "({m},{n}) = {z:?}");
    }
    let doc: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("heff.json")).unwrap()).unwrap();
    assert_eq!(doc["method"], "numeric");
    assert_eq!(doc["boundary"], "periodic");
    assert_eq!(doc["entries"].as_array().unwrap().len(), 81);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "emit".to_string(),
            "--set".into(),
            "N=6".into(),
            "--set".into(),
            "t1=1".into(),
            "--set".into(),
            "gamma=2".into(),
            "--set".into(),
            "boundary=open".into(),
            "--set".into(),
            "g=0.2".into(),
            "--set".into(),
            "cells=[2,4]".into(),
            "--set".into(),
            "t_max=30".into(),
            "--set".into(),
            "n_points=31".into(),
            "--set".into(),
            "picture=mapped".into(),
            "--set".into(),
            dir_arg(d),
        ]
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let owned = args(d);
        run_ok(&owned.iter().map(String::as_str).collect::<Vec<_>>());
    }
    for name in ["populations.csv", "density.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let ma: Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let mb: Value = serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["files"], mb["files"]);
    assert_ne!(ma["config_sha256"], mb["config_sha256"]);
    assert_eq!(read_csv(&a.join("density.csv")).len(), 31 * 12);
}

#[test]
fn invalid_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("never");
    let out = nhbath(&[
        "emit",
        "--set",
        "N=5",
        "--set",
        "t1=1",
        "--set",
        "gamma=-0.5",
        "--set",
        "boundary=open",
        "--set",
        "bogus=1",
        "--set",
        &dir_arg(&out_dir),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    for needle in ["gamma:", "bogus:", "cells:", "t_max:"] {
        assert!(stderr.contains(needle), "{needle} missing from {stderr}");
    }
    assert!(!out_dir.exists());
}

#[test]
fn model_failure_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("never");
    let out = nhbath(&[
        "spectrum",
        "--set",
        "N=8",
        "--set",
        "t1=1",
        "--set",
        "gamma=0",
        "--set",
        "boundary=periodic",
        "--set",
        "E0=[0,0]",
        "--set",
        &dir_arg(&out_dir),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("point_gap_winding"));
    assert!(!out_dir.exists());
}

#[test]
fn experiment_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nhbath(&["heff", "--set", "experiment=spectrum", "--set", &dir_arg(tmp.path())]);
    assert!(!out.status.success());
}

#[test]
fn sweep_shows_localization_cusp() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&[
        "sweep-gamma",
        "--set",
        "N=40",
        "--set",
        "t1=1",
        "--set",
        "boundary=open",
        "--set",
        "g=0.05",
        "--set",
        "cells=[15]",
        "--set",
        "gamma_values=[1.6,1.8,2.0,2.2,2.4]",
        "--set",
        "n_points=201",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    let rows = read_csv(&tmp.path().join("sweep.csv"));
    assert_eq!(rows.len(), 5);
    let p_loc: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let best = (0..5).max_by(|&a, &b| p_loc[a].total_cmp(&p_loc[b])).unwrap();
    assert_eq!(rows[best][0], "2.0");
    assert!(rows[best][3].parse::<f64>().unwrap() < 1e-3);
}

#[test]
fn dressed_and_spectrum_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("dressed");
    run_ok(&[
        "dressed",
        "--set",
        "N=9",
        "--set",
        "t1=1",
        "--set",
        "gamma=2",
        "--set",
        "boundary=open",
        "--set",
        "g=0.1",
        "--set",
        "dressed_kind=edge",
        "--set",
        &dir_arg(&d),
    ]);
    let rows = read_csv(&d.join("dressed.csv"));
    assert_eq!(rows.len(), 19);
    assert_eq!(rows[0][0], "e");
    assert_eq!(rows[0][1], "1.0");

    let s = tmp.path().join("spectrum");
    run_ok(&[
        "spectrum",
        "--set",
        "N=16",
        "--set",
        "t1=1",
        "--set",
        "t2=2",
        "--set",
        "gamma=1",
        "--set",
        "boundary=periodic",
        "--set",
        "E0=[2.0949,-0.5]",
        "--set",
        &dir_arg(&s),
    ]);
    assert_eq!(read_csv(&s.join("spectrum.csv")).len(), 32);
    let summary: Value = serde_json::from_str(&fs::read_to_string(s.join("spectrum_summary.json")).unwrap()).unwrap();
    assert_ne!(summary["winding"].as_i64().unwrap(), 0);
}
