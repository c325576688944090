use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netclass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netclass")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path) {
    let out = netclass(&["synth-cdr", "--preset", "distinct", "--days", "14", "--population", "800", "--out", s(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_writes_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let run = tmp.path().join("run");
    let out = netclass(&["eval", "--data", s(&data), "--features", "cdr", "--trees", "50", "--folds", "7", "--out", s(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.json", "features.csv", "predictions.csv", "importances.csv", "report.json"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let preds = fs::read_to_string(run.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 15);
    assert!(preds.starts_with("id,split,label,predicted,"));
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let run = tmp.path().join(name);
        let out = netclass(&[
            "eval", "--data", s(&data), "--features", "cdr", "--classifier", "rf", "--trees", "80", "--protocol",
            "parity", "--seed", "5", "--threads", threads, "--out", s(&run),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(run.join("predictions.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn extract_to_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let out = netclass(&["extract", "--data", s(&data)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("NumNodes"));
    assert_eq!(text.lines().count(), 15);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let run = tmp.path().join("run");
    let bad = [
        vec!["eval", "--data", s(&data), "--folds", "1", "--out", s(&run)],
        vec!["eval", "--data", s(&data), "--features", "bio", "--out", s(&run)],
        vec!["eval", "--data", s(&data)],
        vec!["eval", "--data", s(&data), "--classifier", "knn", "--k", "0", "--out", s(&run)],
        vec!["synth-cdr", "--preset", "nope", "--out", s(&run)],
    ];
    for args in bad {
        let out = netclass(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // A non-empty output directory is refused.
    let out = netclass(&["eval", "--data", s(&data), "--out", s(&data)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing");
    let out = netclass(&["eval", "--data", s(&missing), "--out", s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(3));
    let edges = tmp.path().join("g.edges");
    fs::write(&edges, "a b\nc\n").unwrap();
    let out = netclass(&["sample", "--graph", s(&edges)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sampling_commands_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let out = netclass(&[
        "sample", "--graph", s(&data.join("day001.edges")), "--attributes", s(&data.join("attributes.csv")), "--kind",
        "zip",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!v.as_array().unwrap().is_empty());

    let csv = tmp.path().join("rows.csv");
    let mut text = String::from("sample_type,mr,avg_network_size\n");
    for i in 0..30 {
        let x = 40.0 + i as f64 * 3.0;
        text += &format!("snowball,{},{x}\nzip,{},{x}\n", 0.3 + 0.001 * i as f64, 0.1 + 0.002 * (i % 5) as f64);
    }
    fs::write(&csv, text).unwrap();
    let out = netclass(&["sampling-regression", "--input", s(&csv), "--n-perm", "200"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["beta2"].as_f64().unwrap() != 0.0);
    assert!(v["permutation"]["pvalue"].as_f64().unwrap() < 0.05);
    let out = netclass(&["sampling-regression", "--input", s(&csv), "--n-perm", "5"]);
    assert_eq!(out.status.code(), Some(2));
}
