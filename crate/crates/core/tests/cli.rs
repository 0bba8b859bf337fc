//! The `fsf` binary driven as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

use fsf_rubric::store::Store;

fn fsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsf"))
        .args(args)
        .env_remove("FSF_DATA")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn score_with_explicit_rubric_file() {
    let rubric = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/rubric.json");
    let o = fsf(&["score", "--rubric", rubric.to_str().unwrap(), "--assessment", "anthropic"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Anthropic: total 35 "));
}

#[test]
fn output_is_deterministic() {
    for args in [&["rank"][..], &["bic", "--json"], &["report", "--format", "csv"], &["frontier", "-a", "cohere"]] {
        let a = fsf(args);
        let b = fsf(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn lint_and_validate_exit_codes() {
    let o = fsf(&["lint", "-a", "anthropic"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("3.1.3: published 14, recomputed 16"));
    let o = fsf(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty() && o.stderr.is_empty());
    let o = fsf(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn validate_reports_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let doc = fsf_rubric::bundled::assessment_document("amazon").unwrap();
    let mut v: serde_json::Value = serde_json::from_str(doc).unwrap();
    v["entries"].as_array_mut().unwrap().retain(|e| e["id"] != "4.6.3");
    let path = dir.path().join("short.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = fsf(&["validate", "-a", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("4.6.3: no entry for this rubric leaf"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(fsf(&["validate", "-a", broken.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn report_writes_only_the_named_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = fsf(&["report", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("table.csv")]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().ends_with("\"Best in class\""));
}

#[test]
fn data_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    Store::init_bundled(dir.path()).unwrap();
    std::fs::remove_file(dir.path().join("assessments/xai.json")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fsf"))
        .arg("rank")
        .env("FSF_DATA", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("xAI"));
    assert!(text.contains("11. Cohere"));
}

#[test]
fn reconcile_sheets() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"rater_id":"alice","scores":{"1.1.1":25,"1.1.2":0}}"#).unwrap();
    std::fs::write(&b, r#"{"rater_id":"bob","scores":{"1.1.1":50,"1.1.2":0}}"#).unwrap();
    let o = fsf(&["reconcile", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "agreed: 1 leaves\ndisagreement 1.1.1: alice=25, bob=50\n");
}

#[test]
fn serve_requires_a_data_directory() {
    let o = fsf(&["serve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("data directory"));
}
