//! End-to-end tests of the command-line binary: output formats,
//! determinism, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use qfi_compress::cli::read_count_records;
use qfi_compress::estimation::fit_fringe;

const BIN: &str = env!("CARGO_BIN_EXE_qfi-compress");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .skip(1) // column header
        .collect()
}

#[test]
fn cascade_n4_reports_average_qfi_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cascade.csv");
    run_ok(&[
        "--command", "cascade", "--n", "4", "--theta-deg", "25",
        "--out", out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let avg_line = text
        .lines()
        .find(|l| l.starts_with("# average_qfi"))
        .expect("average QFI in header");
    let avg: f64 = avg_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    assert!((avg - 4.0).abs() < 1e-9, "average QFI {avg}");
    assert_eq!(data_rows(&text).len(), 8);
    assert!(text.contains("# seed = 0"));
}

#[test]
fn cascade_n2_branch_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cascade.csv");
    run_ok(&[
        "--command", "cascade", "--n", "2", "--theta-deg", "30",
        "--out", out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    let phase = |row: &str| row.split(',').nth(2).unwrap().parse::<f64>().unwrap();
    assert!((phase(rows[0]) - 60f64.to_radians()).abs() < 1e-12);
    assert!(phase(rows[1]).abs() < 1e-12);
}

#[test]
fn cascade_rejects_invalid_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cascade.csv");
    let res = run(&["--command", "cascade", "--n", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_output_directory_is_config_error() {
    let res = run(&[
        "--command", "cascade", "--n", "3",
        "--out", "/nonexistent-dir-xyz/cascade.csv",
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_out_flag_is_config_error() {
    let res = run(&["--command", "cascade", "--n", "3"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn fusion_tree_stats_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fusion.json");
    run_ok(&[
        "--command", "fusion", "--n", "2", "--trials", "100000", "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["seed"], 7);
    let stats = &doc["stats"];
    assert_eq!(stats["n"], 2);
    // One survivor iff the single fusion succeeded: fraction ≈ 1/2.
    let trials = stats["trials"].as_f64().unwrap();
    let with_survivor = stats["survivor_histogram"][1].as_f64().unwrap();
    assert!((with_survivor / trials - 0.5).abs() < 0.005);
    assert!((stats["mean_total_qfi"].as_f64().unwrap() - 2.0).abs() < 0.05);
}

#[test]
fn fusion_pair_mode_adds_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pair.csv");
    run_ok(&[
        "--command", "fusion", "--theta-deg", "30", "--theta2-deg", "60",
        "--trials", "10000", "--out", out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    let mut saw = [false; 2];
    for row in &rows {
        let f: Vec<&str> = row.split(',').collect();
        if f[0] == "success" {
            let bit: usize = f[1].parse().unwrap();
            let phase: f64 = f[2].parse().unwrap();
            let expected = 90.0 + 180.0 * bit as f64;
            assert!((phase - expected).abs() < 1e-9, "herald {bit} phase {phase}");
            saw[bit] = true;
        }
    }
    assert!(saw[0] && saw[1]);
}

#[test]
fn fusion_n1_is_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fusion.json");
    run_ok(&[
        "--command", "fusion", "--n", "1", "--trials", "100",
        "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["stats"]["max_depth"], 0);
    assert_eq!(doc["stats"]["mean_survivors"], 1.0);
    assert_eq!(doc["stats"]["mean_total_qfi"], 1.0);
}

fn write_dist(dir: &Path, name: &str, rows: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, rows).unwrap();
    path
}

#[test]
fn decompose_three_point_example() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path(), "d3.csv", "0,0.25\n1,0.5\n2,0.25\n");
    let out = dir.path().join("ensemble.json");
    run_ok(&[
        "--command", "decompose", "--dist-file", dist.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["ensemble"]["components"].as_array().unwrap().len(), 2);
    assert!((doc["parent_qfi"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((doc["average_qfi"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(doc["completeness_residual"].as_f64().unwrap() < 1e-10);
    assert!(doc["mixture_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn decompose_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path(), "point.csv", "1.5,1\n");
    let out = dir.path().join("ensemble.json");
    run_ok(&[
        "--command", "decompose", "--dist-file", dist.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["ensemble"]["components"].as_array().unwrap().len(), 1);
    assert_eq!(doc["average_qfi"].as_f64().unwrap(), 0.0);
}

#[test]
fn decompose_rejects_negative_probability() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path(), "neg.csv", "0,1.25\n1,-0.25\n");
    let out = dir.path().join("ensemble.json");
    let res = run(&[
        "--command", "decompose", "--dist-file", dist.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn decompose_rejects_unnormalized_file() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path(), "bad.csv", "0,0.6\n1,0.6\n");
    let out = dir.path().join("ensemble.json");
    let res = run(&[
        "--command", "decompose", "--dist-file", dist.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn decompose_rejects_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_dist(dir.path(), "junk.csv", "not,a,number\n");
    let out = dir.path().join("ensemble.json");
    let res = run(&[
        "--command", "decompose", "--dist-file", dist.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn fringe_sweep_has_145_rows_and_doubled_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fringe.csv");
    run_ok(&[
        "--command", "fringe", "--mean-photons", "5000", "--seed", "3",
        "--out", out.to_str().unwrap(),
    ]);
    let records = read_count_records(&out).unwrap();
    assert_eq!(records.len(), 145);
    let fit = fit_fringe(&records).unwrap();
    assert!(fit.model.frequency_offset.abs() < 0.01, "δ = {}", fit.model.frequency_offset);
    assert!(fit.model.amplitude > 0.98, "A = {}", fit.model.amplitude);
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        run_ok(&[
            "--command", "fringe", "--mean-photons", "300", "--seed", "42",
            "--out", out.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let c = dir.path().join("c.csv");
    run_ok(&[
        "--command", "fringe", "--mean-photons", "300", "--seed", "43",
        "--out", c.to_str().unwrap(),
    ]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn estimate_single_point_approaches_qcrb() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("estimate.json");
    run_ok(&[
        "--command", "estimate", "--theta-deg", "40", "--trials", "2000",
        "--mean-photons", "522", "--seed", "11", "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["qcrb_sqrt_n_std"]["compressed"], 0.5);
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    let compressed = points[0]["compressed"]["sqrt_n_std"].as_f64().unwrap();
    let uncompressed = points[0]["uncompressed"]["sqrt_n_std"].as_f64().unwrap();
    assert!((compressed - 0.5).abs() < 0.05, "compressed {compressed}");
    assert!((uncompressed - 1.0).abs() < 0.1, "uncompressed {uncompressed}");
}

#[test]
fn estimate_with_drift_has_oscillating_bias() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("estimate.json");
    run_ok(&[
        "--command", "estimate", "--trials", "3000", "--drift-eta", "0.02",
        "--seed", "12", "--out", out.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let points = doc["points"].as_array().unwrap();
    assert_eq!(points.len(), 15);
    let max_bias = points
        .iter()
        .map(|p| p["arccos"]["bias"].as_f64().unwrap())
        .fold(0.0f64, f64::max);
    assert!(max_bias > 0.005, "max arccos bias {max_bias}");
}
