use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ads(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ads")).args(args).output().expect("run ads")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn demo(dir: &Path) -> (PathBuf, PathBuf) {
    let out = ads(&["demo-data", "--customers", "300", "--out", path(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (dir.join("illustrative"), dir.join("planted"))
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {line}"))
}

#[test]
fn run_on_illustrative_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (ill, _) = demo(dir.path());
    let out_dir = dir.path().join("out");
    let out = ads(&[
        "run",
        path(&ill.join("customer.csv")),
        path(&ill.join("product.csv")),
        path(&ill.join("order.csv")),
        "--anchor",
        "customerID",
        "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for a in ["profile.json", "structure.json", "schema.dot", "missingness.json", "features.csv", "lineage.json"] {
        assert!(out_dir.join(a).exists(), "{a} missing");
    }
    let header = std::fs::read_to_string(out_dir.join("features.csv")).unwrap();
    assert!(header.starts_with("customerID,"));
}

#[test]
fn ragged_row_reports_profile_stage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1\n").unwrap();
    let out = ads(&["profile", path(&bad), "--out", path(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_line(&out);
    assert_eq!(e["stage"], "profile");
    assert_eq!(e["code"], "RaggedRow");
}

#[test]
fn missing_anchor_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ill, _) = demo(dir.path());
    let out = ads(&["features", path(&ill.join("order.csv")), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["stage"], "config");
}

#[test]
fn drift_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let rows = |shift: f64| {
        let mut s = String::from("x,y\n");
        for i in 0..400 {
            let u = (i as f64 * 0.618_033_988_7).fract();
            let v = (i as f64 * 0.414_213_562_4).fract();
            s.push_str(&format!("{},{}\n", u + shift, v));
        }
        s
    };
    std::fs::write(&a, rows(0.0)).unwrap();
    std::fs::write(&b, rows(0.5)).unwrap();
    let out_dir = dir.path().join("o");
    let same = ads(&["drift", "--ref", path(&a), "--new", path(&a), "--out", path(&out_dir)]);
    assert_eq!(same.status.code(), Some(0));
    let moved = ads(&["drift", "--ref", path(&a), "--new", path(&b), "--out", path(&out_dir)]);
    assert_eq!(moved.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("drift.json")).unwrap()).unwrap();
    assert_eq!(report["drift"], true);
    assert_eq!(report["ads_report_version"], 1);
}

#[test]
fn separate_stages_match_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let (_, planted) = demo(dir.path());
    let inputs = [planted.join("customers.csv"), planted.join("orders.csv")];
    let full = dir.path().join("full");
    let split = dir.path().join("split");
    let mut run = vec!["run", "--anchor", "customerID", "--label", "churned", "--seed", "7", "--budget", "4"];
    run.extend(inputs.iter().map(|p| path(p)));
    run.extend(["--out", path(&full)]);
    assert!(ads(&run).status.success());

    let common = ["--seed", "7", "--out", path(&split)];
    let mut profile = vec!["profile"];
    profile.extend(inputs.iter().map(|p| path(p)));
    profile.extend(common);
    assert!(ads(&profile).status.success());
    let mut features = vec!["features", "--anchor", "customerID", "--label", "churned"];
    features.extend(inputs.iter().map(|p| path(p)));
    features.extend(common);
    assert!(ads(&features).status.success());
    let mut train = vec!["train", "--label", "churned", "--budget", "4"];
    train.extend(inputs.iter().map(|p| path(p)));
    train.extend(common);
    let out = ads(&train);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for a in [
        "profile.json",
        "structure.json",
        "missingness.json",
        "features.csv",
        "lineage.json",
        "model_report.json",
        "model.json",
    ] {
        let x = std::fs::read(full.join(a)).unwrap_or_else(|_| panic!("{a} missing in full run"));
        let y = std::fs::read(split.join(a)).unwrap_or_else(|_| panic!("{a} missing in split run"));
        assert!(x == y, "{a} differs");
    }

    let scores = ads(&[
        "predict",
        "--model",
        path(&full.join("model.json")),
        "--features",
        path(&full.join("features.csv")),
        "--lineage",
        path(&full.join("lineage.json")),
    ]);
    assert!(scores.status.success(), "{}", String::from_utf8_lossy(&scores.stderr));
    let text = String::from_utf8(scores.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("customerID,score"));
    assert_eq!(text.lines().count(), 301);
}
