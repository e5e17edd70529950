use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_markoff-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MARKOFF_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["gen", "--k-max", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("allow-large-k"));
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn first_multiplier() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["mj", "--j", "1", "--m-bound", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("m_1 = 2 (unique in |m| <= 100)"));
    let text = std::fs::read_to_string(dir.path().join("mj-1.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["command"], "mj");
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn cache_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("seq.txt");
    let o = run(dir.path(), &["gen", "--k-max", "14", "--write", cache.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&cache).unwrap();
    assert!(text.starts_with("markoff-seq v1\n"));
    let o = run(dir.path(), &["verify", "--k-max", "14", "--cache", cache.to_str().unwrap(), "--no-write"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // 37666 is x_{7,0}; a wrong value disagrees with the recurrence
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, text.replace("7 37666 ", "7 37667 ")).unwrap();
    let o = run(dir.path(), &["gen", "--k-max", "14", "--cache", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&bad, text.replace("markoff-seq v1", "something else")).unwrap();
    let o = run(dir.path(), &["gen", "--k-max", "14", "--cache", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Format"));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = || {
        let o = run(dir.path(), &["delta", "--r", "T^2", "--k-lo", "8", "--k-hi", "12"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let json = std::fs::read(dir.path().join("delta.json")).unwrap();
        let csv = std::fs::read(dir.path().join("delta.csv")).unwrap();
        (json, csv)
    };
    let first = snapshot();
    assert!(!first.1.is_empty());
    assert_eq!(first, snapshot());
}

#[test]
fn verify_reports_no_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--k-max", "16"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("failures: 0"));
    let o = run(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("summary.json").exists());
}
