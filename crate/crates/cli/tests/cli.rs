use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tagtrack(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tagtrack"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn tagtrack")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const SMALL: [&str; 6] = [
    "--set",
    "scenario.n_particles=500",
    "--set",
    "scenario.max_time=40",
    "--set",
    "planner.m_samples=5",
];

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--config", "sim-5.1", "--out", "out", "--particles-snapshots", "--planner-trace"];
    args.extend(SMALL);
    ok(&tagtrack(&args, dir.path()));
    let out = dir.path().join("out");
    for f in ["result.json", "trajectory.csv", "estimates.csv", "particles.csv", "planner_trace.jsonl"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["per_target_rms"].as_array().unwrap().len(), 10);
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count() as u64, result["flight_time"].as_u64().unwrap() + 2);
    let trace = fs::read_to_string(out.join("planner_trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count() as u64, result["planning_events"].as_u64().unwrap());
    assert!(fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".partial")));
}

#[test]
fn mc_writes_runs_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["mc", "--config", "sim-5.1", "--runs", "3", "--out", "mc", "--jobs", "2"];
    args.extend(SMALL);
    ok(&tagtrack(&args, dir.path()));
    let runs = fs::read_to_string(dir.path().join("mc/runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    let summary = fs::read_to_string(dir.path().join("mc/summary.csv")).unwrap();
    assert!(summary.starts_with("configuration,runs,rms_m_mean"));
    assert_eq!(summary.lines().count(), 2);
    let timing = fs::read_to_string(dir.path().join("mc/timing.csv")).unwrap();
    assert!(timing.starts_with("configuration,runs,planning_time_s_mean"));
}

#[test]
fn sweep_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep", "--config", "table-1", "--runs", "1", "--out", "sw", "--parameter", "alpha", "--values", "0.1,0.9999",
    ];
    args.extend(SMALL);
    ok(&tagtrack(&args, dir.path()));
    let summary = fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn config_errors_name_the_line_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[scenario]\nn_targets = 3\n\n[planner]\nalpha = 1.0\n").unwrap();
    let out = tagtrack(&["run", "--config", "bad.toml", "--out", "o"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");
    assert!(!dir.path().join("o").exists());

    fs::write(dir.path().join("typo.toml"), "[scenario]\nn_target = 3\n").unwrap();
    let out = tagtrack(&["mc", "--config", "typo.toml", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = tagtrack(&["run", "--config", "no-such-preset", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim-5.1"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = tagtrack(&["run", "--set", "planner.n_action_subset=0", "--out", "o"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("o").exists());
}

#[test]
fn survey_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tagtrack(&["gen-range", "--config", "field-multipath", "--seed", "4", "--out", "survey.csv"], dir.path()));
    let survey = fs::read_to_string(dir.path().join("survey.csv")).unwrap();
    assert_eq!(survey.lines().count(), 1 + 32 * 30);
    ok(&tagtrack(&["fit", "--data", "survey.csv", "--out", "fit"], dir.path()));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fit/fit.json")).unwrap()).unwrap();
    let mp = fit.as_array().unwrap().iter().find(|f| f["kind"] == "multi_path").unwrap();
    assert!((mp["p_ref"].as_f64().unwrap() + 15.28).abs() < 0.5);
    assert!(dir.path().join("fit/residuals.csv").is_file());
    assert!(dir.path().join("fit/curve.csv").is_file());

    let out = tagtrack(&["fit", "--data", "missing.csv", "--out", "fit2"], dir.path());
    assert!(!out.status.success());
    assert!(!dir.path().join("fit2").exists());
}

#[test]
fn pattern_has_one_row_per_degree() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tagtrack(&["emit-pattern", "--out", "pattern.csv"], dir.path()));
    let text = fs::read_to_string(dir.path().join("pattern.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "azimuth_deg,gain_db");
    assert_eq!(rows.len(), 361);
    let gain = |r: &str| r.split(',').nth(1).unwrap().parse::<f64>().unwrap();
    assert!(gain(rows[1]) > gain(rows[181]));
}
