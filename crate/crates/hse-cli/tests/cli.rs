//! Binary-level tests: exit codes, file emission, and the CLI surface.

use std::path::Path;
use std::process::Command;

fn hse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hse"))
}

#[test]
fn krylov_subcommand_writes_sectors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kry");
    let status = hse()
        .args(["krylov", "--n", "4", "--d", "3", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("sectors.json").exists());
    assert!(out.join("manifest.json").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sectors.json")).unwrap())
            .unwrap();
    assert_eq!(doc["bfs"]["sector_count"], 31);
    assert_eq!(doc["formulas"]["largest_sector"], 15);
    assert_eq!(doc["consistent"], true);
}

#[test]
fn selftest_exits_zero() {
    let status = hse().arg("selftest").status().unwrap();
    assert!(status.success());
}

#[test]
fn config_error_exits_two() {
    // horizon = 0 is rejected before any compute.
    let out = hse()
        .args(["run", "--experiment", "gbw", "--t-max", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    // Unknown experiment.
    let out = hse().args(["run", "--experiment", "wat"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // hsf at d = 2 is invalid.
    let out = hse()
        .args(["run", "--experiment", "hsf", "--d", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"experiment\": \"gbw\", \"unknown_field\": 1}").unwrap();
    let out = hse()
        .args(["run", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let out_dir = dir.path().join("run");
    std::fs::write(
        &path,
        format!(
            "{{\"experiment\": \"gbw\", \"horizon\": 50, \"instances\": 2, \"seed\": 3, \"out_dir\": \"{}\"}}",
            out_dir.display()
        ),
    )
    .unwrap();
    let status = hse()
        .args(["run", "--config", path.to_str().unwrap(), "--instances", "3"])
        .status()
        .unwrap();
    assert!(status.success());
    // Flag override wins: three instance files.
    assert!(out_dir.join("instance_2.csv").exists());
    assert!(!out_dir.join("instance_3.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["instances"], 3);
    assert_eq!(manifest["config"]["horizon"], 50);
    assert_eq!(manifest["complete"], true);
    assert_eq!(manifest["child_seeds"].as_array().unwrap().len(), 3);
    // Every emitted file is listed with a hash.
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["name"] == "aggregate.csv"));
    for f in files {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn hse_threads_env_caps_workers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hse()
        .env("HSE_THREADS", "1")
        .args([
            "run",
            "--experiment",
            "gbw",
            "--t-max",
            "50",
            "--instances",
            "2",
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let bad = hse()
        .env("HSE_THREADS", "zero")
        .args(["run", "--experiment", "gbw", "--t-max", "50"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn instance_csv_columns_match_contract(){
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hse()
        .args([
            "run", "--experiment", "scar", "--t-max", "100", "--instances", "1",
            "--seed", "2", "--out", out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("instance_0.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,k,initial,delta_full,delta_subspace,bound_lb,cross_bound"
    );
    // The non-scar start carries subspace and cross-bound columns.
    let ones_row = lines.find(|l| l.contains(",ones,")).unwrap();
    let cols: Vec<&str> = ones_row.split(',').collect();
    assert_eq!(cols.len(), 7);
    assert!(!cols[4].is_empty(), "delta_subspace column empty: {ones_row}");
    assert!(!cols[6].is_empty(), "cross_bound column empty: {ones_row}");
}

#[test]
fn dee_csv_columns_match_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hse()
        .args([
            "run", "--experiment", "dee", "--t-max", "80", "--dee-count", "32",
            "--dee-repeats", "2", "--seed", "2", "--out", out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("dee_zeros.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "T,dee_min,dee_mean,dee_max,m_prime,epsilon,seed"
    );
}

#[test]
fn sampled_reference_mode_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hse()
        .args([
            "run", "--experiment", "dee", "--t-max", "60", "--dee-count", "16",
            "--dee-repeats", "2", "--dee-reference", "sampled", "--seed", "2",
            "--out", out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
}

fn read_all(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let status = hse()
            .args([
                "run", "--experiment", "hsf", "--t-max", "200", "--seed", "9",
                "--initial", "basis:0000,basis:0102",
                "--out", out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read_all(&a.join("aggregate.csv")), read_all(&b.join("aggregate.csv")));
    assert_eq!(read_all(&a.join("instance_0.csv")), read_all(&b.join("instance_0.csv")));
}
