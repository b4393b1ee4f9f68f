//! Black-box tests of the `fleetreg` binary: output files, table shapes,
//! determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fleetreg"));
    c.env_remove("FLEETREG_SEED");
    c
}

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../canonical.json")
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn tiny_generator() -> Value {
    json!({
        "m_clusters": 2,
        "samples_per_cluster": 30,
        "global_slope_dist": [2.0, 0.1],
        "global_intercept_dist": [0.0, 1.0],
        "local_slope_dist": [-1.0, 0.2],
        "local_intercept_dist": [0.0, 0.2],
        "center_x_range": [-30.0, 30.0],
        "center_noise_std": 16.0,
        "sample_noise_std": 0.5,
        "cluster_spread": 2.0,
        "centers": [-10.0, 10.0],
        "seed": 5
    })
}

fn tiny_experiment(outputs: &Path) -> Value {
    json!({
        "dataset": {"synthetic": tiny_generator()},
        "specs": [{"kind": "ridge"}, {"kind": "knn"}],
        "modes": ["global", {"fbr_kmeans": {"k": 2}}],
        "folds": 4,
        "seed": 5,
        "outputs": outputs
    })
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generate_reports_shape_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let truth = dir.path().join("truth.json");
    let out = bin()
        .args(["generate", "-c"])
        .arg(reference_config())
        .arg("-o")
        .arg(&csv)
        .arg("-t")
        .arg(&truth)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).contains("1000 rows x 10 features (5 clusters)"));

    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0].split(',').count(), 12); // 10 features + target + cluster

    let truth: Value = serde_json::from_str(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(truth["clusters"].as_array().unwrap().len(), 5);
}

#[test]
fn generate_twice_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out =
            bin().args(["generate", "-c"]).arg(reference_config()).arg("-o").arg(p).output().unwrap();
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn env_seed_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let out =
        bin().args(["generate", "-c"]).arg(reference_config()).arg("-o").arg(&a).output().unwrap();
    assert!(out.status.success());
    let out = bin()
        .env("FLEETREG_SEED", "99")
        .args(["generate", "-c"])
        .arg(reference_config())
        .arg("-o")
        .arg(&b)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unparseable_seed_override_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("FLEETREG_SEED", "not-a-number")
        .args(["generate", "-c"])
        .arg(reference_config())
        .arg("-o")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_cluster_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_generator();
    cfg["m_clusters"] = json!(0);
    cfg.as_object_mut().unwrap().remove("centers");
    let path = write_json(dir.path(), "bad.json", &cfg);
    let out = bin()
        .args(["generate", "-c"])
        .arg(&path)
        .arg("-o")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn malformed_json_exits_2_and_missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{not json").unwrap();
    let out = bin()
        .args(["generate", "-c"])
        .arg(&garbled)
        .arg("-o")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["generate", "-c"])
        .arg(dir.path().join("nowhere.json"))
        .arg("-o")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn benchmark_writes_table_json_and_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = dir.path().join("out");
    let cfg = write_json(dir.path(), "exp.json", &tiny_experiment(&outputs));
    let out = bin().args(["benchmark", "-c"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = stdout_of(&out);
    assert!(table.contains('±'));

    let text = std::fs::read_to_string(outputs.join("benchmark.txt")).unwrap();
    // header + 2 specs x 2 modes
    assert_eq!(text.lines().count(), 5);
    for method in ["Ridge", "kNN", "FBR-Ridge", "FBR-kNN"] {
        assert!(text.contains(method), "missing row {method} in:\n{text}");
    }

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(outputs.join("benchmark.json")).unwrap())
            .unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);

    for name in [
        "predictions_Ridge.csv",
        "predictions_kNN.csv",
        "predictions_FBR-Ridge.csv",
        "predictions_FBR-kNN.csv",
    ] {
        let p = outputs.join(name);
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 61, "{name} should cover all 60 rows");
    }
}

#[test]
fn benchmark_with_missing_dataset_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "dataset": {"csv": dir.path().join("missing.csv"), "target": "y"},
        "spec": {"kind": "ridge"},
        "mode": "global",
        "seed": 1,
        "outputs": dir.path().join("out")
    });
    let path = write_json(dir.path(), "exp.json", &cfg);
    let out = bin().args(["benchmark", "-c"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_row_per_factor_method_metric() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = dir.path().join("out");
    let mut exp = tiny_experiment(&outputs);
    exp["specs"] = json!([{"kind": "ridge"}]);
    let cfg = write_json(dir.path(), "exp.json", &exp);
    let out = bin().args(["sweep", "-c"]).arg(&cfg).args(["--factors", "1,2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(outputs.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "factor,method,mode,metric,mean,std");
    // 2 factors x 1 spec x 2 modes x 4 metrics
    assert_eq!(lines.len() - 1, 16);
    let mae_rows = lines.iter().filter(|l| l.contains(",mae,")).count();
    assert_eq!(mae_rows, 4);
}

#[test]
fn unsorted_sweep_factors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let outputs = dir.path().join("out");
    let cfg = write_json(dir.path(), "exp.json", &tiny_experiment(&outputs));
    let out = bin().args(["sweep", "-c"]).arg(&cfg).args(["--factors", "2,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explain_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let outputs = dir.path().join(sub);
        let cfg = write_json(dir.path(), &format!("{sub}.json"), &tiny_experiment(&outputs));
        let out = bin().args(["explain", "-c"]).arg(&cfg).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs
    };
    let a = run("a");
    let b = run("b");
    for name in [
        "explanations_global.csv",
        "explanations_fbr.csv",
        "mean_abs_importance.csv",
        "consistency.json",
        "sample_explanation.csv",
    ] {
        let ca = std::fs::read(a.join(name)).unwrap();
        let cb = std::fs::read(b.join(name)).unwrap();
        assert_eq!(ca, cb, "{name} differs between identical runs");
    }
    // fold 0 of 60 rows under 4 folds holds out 15
    let text = std::fs::read_to_string(a.join("explanations_fbr.csv")).unwrap();
    assert_eq!(text.lines().count(), 16);
    let global = std::fs::read_to_string(a.join("explanations_global.csv")).unwrap();
    assert_eq!(global.lines().count(), 16);
    let consistency: Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("consistency.json")).unwrap())
            .unwrap();
    assert!(consistency["global"].is_object() && consistency["fbr"].is_object());
}

#[test]
fn usage_errors_exit_2() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
