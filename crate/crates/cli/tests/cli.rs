use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn agethresh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agethresh"))
        .args(args)
        .env_remove("AGETHRESH_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = agethresh(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analyze_reports_envelope_and_lower_peak() {
    let v = json(&["analyze", "--n", "100", "--gamma", "221", "--tau", "0.0469"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "analyze");
    assert_eq!(v["config"]["gamma"], 221);
    let r = &v["result"];
    let pmf: Vec<f64> = r["pmf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(pmf.len(), 101);
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let peaks = r["peak_fractions"].as_array().unwrap();
    assert!(peaks
        .iter()
        .any(|p| (p.as_f64().unwrap() - 0.1915).abs() < 0.03));
}

#[test]
fn analyze_rejects_small_threshold() {
    let out = agethresh(&["analyze", "--n", "10", "--gamma", "5", "--tau", "0.3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    assert!(out.stdout.is_empty());
}

#[test]
fn roots_csv_marks_selected_root() {
    let out = agethresh(&["roots", "--r", "2.5", "--alpha", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,root,selected,regime"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().filter(|l| l.contains(",true,")).count(), 1);
}

#[test]
fn roots_single_peak() {
    let v = json(&["roots", "--r", "1.5", "--alpha", "2"]);
    assert_eq!(v["result"]["roots"].as_array().unwrap().len(), 1);
    assert_eq!(v["result"]["regime"], "SinglePeak");
}

#[test]
fn oracle_agrees_and_fails_on_impossible_tolerance() {
    let v = json(&["oracle", "--n", "2", "--gamma", "4", "--tau", "0.3"]);
    assert!(v["result"]["max_abs_discrepancy"].as_f64().unwrap() < 1e-9);
    let out = agethresh(&[
        "oracle", "--n", "2", "--gamma", "4", "--tau", "0.3", "--tol", "0",
    ]);
    assert!(!out.status.success());
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate", "--policy", "sa", "--n", "10", "--slots", "2e4", "--warmup", "1e3", "--seed",
        "4",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    assert_eq!(a["result"]["slots_simulated"], 20_000);
}

#[test]
fn sweep_and_summarize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = agethresh(&[
        "sweep",
        "--policy",
        "ta,sa",
        "--n",
        "10,20",
        "--slots",
        "2e4",
        "--warmup",
        "1e3",
        "--seeds",
        "3",
        "--format",
        "csv",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("policy,n,aoi,aoi_over_n,throughput,seed,gamma,tau,slots,active_fraction,tx_per_slot")
    );
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 3);

    let v = json(&["summarize", csv.to_str().unwrap()]);
    let s = v.to_string();
    assert!(s.contains("slopes"), "{s}");
    let out = agethresh(&["summarize", "--format", "csv", csv.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1 + 4);
}

#[test]
fn load_sweep_tabulates_throughput() {
    let out = agethresh(&[
        "sweep", "--kind", "load", "--g", "0:2:0.5", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows[0], "G,throughput");
    assert_eq!(rows.len(), 6);
    let at_one: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((at_one - (-1.0f64).exp()).abs() < 1e-15);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_agethresh"))
        .args(["roots", "--r", "1.5", "--alpha", "2"])
        .env("AGETHRESH_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let file = dir.path().join("roots.json");
    assert!(Path::new(&file).exists());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(file).unwrap()).unwrap();
    assert_eq!(v["command"], "roots");
}

#[test]
fn simulation_budget_guard() {
    let out = agethresh(&[
        "simulate", "--policy", "sa", "--n", "100", "--slots", "1e6", "--budget", "1e6",
    ]);
    assert!(!out.status.success());
}
