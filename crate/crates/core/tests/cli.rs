//! Black-box tests of the `yoyosim` binary: artifact shape, exit codes,
//! and reproducibility of every artifact-producing subcommand.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn yoyosim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yoyosim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_writes_artifacts_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = yoyosim(dir, &["simulate", "--builtin", "steady"]);
        assert_ok(&out);
    }
    for name in ["steady_trace.csv", "steady_trace.jsonl", "steady_plot.csv"] {
        let first = read(a.path(), name);
        assert!(!first.is_empty(), "{name} is empty");
        assert_eq!(first, read(b.path(), name), "{name} differs across runs");
    }
    // The trace parses back and covers the full hour.
    let trace =
        yoyosim::Trace::from_csv(std::str::from_utf8(&read(a.path(), "steady_trace.csv")).unwrap())
            .unwrap();
    assert_eq!(trace.len(), 3600);
}

#[test]
fn compare_writes_a_parsable_damage_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = yoyosim(dir.path(), &["compare", "--builtin", "packed-yoyo-k20"]);
    assert_ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&read(
        dir.path(),
        "packed-yoyo-k20_damage.json",
    ))
    .unwrap();
    assert!(report["relative_performance_damage"].as_f64().unwrap() > 1.0);
    assert!(report["relative_economic_damage"].as_f64().unwrap() > 1.0);
    assert!(report["potency"].as_f64().unwrap() > 0.0);
    assert!(report["attack_cost"].as_f64().unwrap() > 0.0);
    assert!(report["billed_overhead"].as_f64().unwrap() > 0.0);
    for tag in ["baseline", "unit", "attack"] {
        assert!(
            dir.path()
                .join(format!("packed-yoyo-k20_{tag}_trace.csv"))
                .exists(),
            "{tag} trace missing"
        );
    }
}

#[test]
fn dataset_has_the_grid_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = yoyosim(
        dir.path(),
        &["dataset", "--out", "d.csv", "--runs-per-cell", "1"],
    );
    assert_ok(&out);
    let text = String::from_utf8(read(dir.path(), "d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 51, "header plus one row per grid cell");
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 21, "20 features plus the label");
    assert_eq!(*header.last().unwrap(), "label");
    assert!(header.contains(&"pods_max"));
    assert!(header.contains(&"nodes_std"));
    let labels: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(labels.iter().filter(|l| **l == "0").count(), 24);
    assert_eq!(labels.iter().filter(|l| **l == "1").count(), 27);
}

/// A linearly separable toy corpus: feature 0 decides the class, feature 1
/// is a constant distractor.
fn toy_csv() -> String {
    let mut text = String::from("x,y,label\n");
    for i in 0..50 {
        text.push_str(&format!("{},1,0\n", i));
    }
    for i in 0..50 {
        text.push_str(&format!("{},1,1\n", 100 + i));
    }
    text
}

#[test]
fn train_then_eval_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.csv"), toy_csv()).unwrap();

    let out = yoyosim(dir.path(), &["train", "--data", "toy.csv"]);
    assert_ok(&out);
    let metrics: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "metrics.json")).unwrap();
    assert_eq!(metrics["test_metrics"]["accuracy"].as_f64().unwrap(), 1.0);
    assert_eq!(metrics["test_metrics"]["recall"].as_f64().unwrap(), 1.0);
    let losses = metrics["train_log_loss"].as_array().unwrap();
    assert_eq!(losses.len(), 11, "initial loss plus one entry per tree");
    assert_eq!(
        metrics["feature_importance"][0][0].as_str().unwrap(),
        "x",
        "the informative feature ranks first"
    );

    // Evaluating the saved model on the full corpus reproduces perfection.
    let out = yoyosim(
        dir.path(),
        &[
            "eval",
            "--data",
            "toy.csv",
            "--model",
            "model.json",
            "--metrics-out",
            "eval.json",
        ],
    );
    assert_ok(&out);
    let eval: serde_json::Value = serde_json::from_slice(&read(dir.path(), "eval.json")).unwrap();
    assert_eq!(eval["accuracy"].as_f64().unwrap(), 1.0);

    // Retraining with the same seed writes a byte-identical model.
    let other = tempfile::tempdir().unwrap();
    fs::write(other.path().join("toy.csv"), toy_csv()).unwrap();
    let out = yoyosim(other.path(), &["train", "--data", "toy.csv"]);
    assert_ok(&out);
    assert_eq!(read(dir.path(), "model.json"), read(other.path(), "model.json"));
}

#[test]
fn eval_rejects_a_model_with_foreign_features() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.csv"), toy_csv()).unwrap();
    let out = yoyosim(dir.path(), &["train", "--data", "toy.csv"]);
    assert_ok(&out);
    // Same shape, different column names: the model must refuse it.
    fs::write(
        dir.path().join("renamed.csv"),
        toy_csv().replacen("x,y,label", "a,b,label", 1),
    )
    .unwrap();
    let out = yoyosim(
        dir.path(),
        &["eval", "--data", "renamed.csv", "--model", "model.json"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn optimal_reports_the_best_burst_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = yoyosim(dir.path(), &["optimal", "--power", "20", "--json"]);
    assert_ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["burst_on_secs"].as_u64().unwrap(), 220);
    assert_eq!(report["burst_off_secs"].as_u64().unwrap(), 1025);
    assert_eq!(report["cycle_secs"].as_u64().unwrap(), 1245);
    assert!(report["attack_cost"].as_f64().unwrap() < 20.0 * 220.0 / 1245.0 + 1e-9);
}

#[test]
fn scenario_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = yoyosim(dir.path(), &["scenarios", "--export", "exported"]);
    assert_ok(&out);
    let steady = dir.path().join("exported").join("steady.toml");
    assert!(steady.exists());
    // An exported file feeds straight back into simulate.
    let out = yoyosim(
        dir.path(),
        &["simulate", "--scenario", steady.to_str().unwrap(), "--duration", "60"],
    );
    assert_ok(&out);
    assert!(dir.path().join("steady_trace.csv").exists());
}

#[test]
fn failures_exit_nonzero_with_useful_messages() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown builtin name.
    let out = yoyosim(dir.path(), &["simulate", "--builtin", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nope"), "stderr: {stderr}");
    assert!(stderr.contains("steady"), "lists the available names: {stderr}");

    // Malformed TOML reports the offending location.
    fs::write(dir.path().join("bad.toml"), "name = \"x\"\nduration = [oops\n").unwrap();
    let out = yoyosim(dir.path(), &["simulate", "--scenario", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "stderr: {stderr}");

    // No source at all.
    let out = yoyosim(dir.path(), &["simulate"]);
    assert_eq!(out.status.code(), Some(1));

    // Missing file.
    let out = yoyosim(dir.path(), &["simulate", "--scenario", "absent.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));

    // Clap-level misuse is distinguishable from runtime failure.
    let out = yoyosim(dir.path(), &["simulate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // Nothing above may leave artifacts behind.
    let leftover: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n != "bad.toml")
        .collect();
    assert!(leftover.is_empty(), "leftover artifacts: {leftover:?}");
}
