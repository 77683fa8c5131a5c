use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magbeam"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn edited(name: &str, dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenario(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(format!("{name}_edited.json"));
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

#[test]
fn zero_target_gives_zero_solution() {
    let s = scenario("desk_two_rx");
    let o = run(&["beamform", s.to_str().unwrap(), "--alpha", "1,0", "--target-power", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["solution"]["tx_power"].as_f64(), Some(0.0));
    assert_eq!(v["solution"]["achieved_sum_power"].as_f64(), Some(0.0));
}

#[test]
fn randomization_is_reproducible() {
    let s = scenario("desk");
    let args = [
        "beamform",
        s.to_str().unwrap(),
        "--alpha",
        "0.25,0.25,0.25,0.25",
        "--target-power",
        "2",
        "--method",
        "randomization",
        "--seed",
        "7",
        "--draws",
        "300",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["solution"]["method"], "randomization");
    let per_rx = v["solution"]["per_rx_power"].as_array().unwrap();
    assert!(per_rx.iter().all(|p| p.as_f64().unwrap() >= 0.5 * (1.0 - 1e-9)));
}

#[test]
fn maximize_reports_bisection() {
    let s = scenario("desk_single_rx");
    let o = run(&["beamform", s.to_str().unwrap(), "--maximize", "--no-peaks"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = v["p_star"].as_f64().unwrap();
    assert!(p > 70.0 && p < 80.0, "{p}");
    assert!(v["solution"]["tx_power"].as_f64().unwrap() <= 100.0 * (1.0 + 1e-9));
}

#[test]
fn usage_errors_exit_64() {
    let s = scenario("desk_single_rx");
    let s = s.to_str().unwrap();
    for args in [
        vec!["beamform", s, "--maximize", "--target-power", "1"],
        vec!["beamform", s],
        vec!["beamform", s, "--alpha", "0.5,0.5", "--target-power", "1"],
        vec!["beamform", s, "--target-power", "1", "--method", "closed-form"],
        vec!["beamform", "/nonexistent.json", "--maximize"],
        vec!["nonsense"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 64, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn infeasible_exits_2() {
    let s = scenario("desk_single_rx");
    let o = run(&["beamform", s.to_str().unwrap(), "--target-power", "500"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn region_grid_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let s = scenario("desk_two_rx");
    let o = run(&["region", s.to_str().unwrap(), "--grid", "2", "--no-peaks", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("alpha_1,alpha_2,p_star"));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("region.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "region");
    assert_eq!(m["scenario_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["options"]["grid"], 2);
    assert!(m["finished_unix_ms"].as_u64() >= m["started_unix_ms"].as_u64());

    let again = dir.path().join("again.csv");
    run(&["region", s.to_str().unwrap(), "--grid", "2", "--no-peaks", "--out", again.to_str().unwrap()]);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
}

#[test]
fn region_baseline_adds_benchmark_rows() {
    let s = scenario("desk_two_rx");
    let o = run(&["region", s.to_str().unwrap(), "--grid", "1", "--baseline"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(",benchmark")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.ends_with(",beamforming")).count(), 2);
}

#[test]
fn region_needs_two_receivers_or_profiles() {
    let s = scenario("desk");
    assert_eq!(code(&run(&["region", s.to_str().unwrap(), "--grid", "4"])), 64);
    let o = run(&["region", s.to_str().unwrap(), "--alpha-list", "0.25,0.25,0.25,0.25", "--no-peaks"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn noiseless_exact_estimator_has_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mse.csv");
    let s = scenario("desk");
    let o = run(&[
        "estimate",
        s.to_str().unwrap(),
        "--estimator",
        "perfect",
        "--snr-list",
        "inf",
        "--trials",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(row[1].parse::<f64>().unwrap() <= 1e-18);
    assert!(dir.path().join("mse.csv.manifest.json").exists());
}

#[test]
fn estimate_checks_slots() {
    let s = scenario("desk");
    let s = s.to_str().unwrap();
    assert_eq!(code(&run(&["estimate", s, "--slots", "3", "--trials", "5"])), 64);
    assert_eq!(code(&run(&["estimate", s, "--estimator", "perfect", "--slots", "5", "--trials", "5"])), 64);
    let o = run(&["estimate", s, "--estimator", "pairwise", "--slots", "20", "--snr-list", "30", "--trials", "50"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",pairwise,20"));
}

#[test]
fn estimate_is_reproducible() {
    let s = scenario("desk");
    let args = ["estimate", s.to_str().unwrap(), "--snr-list", "20,40", "--trials", "200", "--seed", "3"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["validate", scenario("desk").to_str().unwrap()])), 0);

    let weak = edited("desk", dir.path(), |v| {
        for x in v["peak_voltage"]["value"].as_array_mut().unwrap() {
            *x = Value::from(1.0);
        }
    });
    let o = run(&["validate", weak.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(stdout(&o).contains("non_triviality"), "{}", stdout(&o));

    let skew = edited("desk_single_rx", dir.path(), |v| {
        v["mutual_tx_tx"]["value"][0][1] = Value::from(5e-6);
    });
    let o = run(&["validate", skew.to_str().unwrap(), "--json"]);
    assert_ne!(code(&o), 0);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["pass"], false);
    assert!(report["violations"].as_array().unwrap().iter().any(|v| v["condition"] == "reciprocity"));
}
