//! The `kato` binary against checked-in golden outputs, plus exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn kato(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kato")).args(args).output().expect("kato runs")
}

fn assert_golden(args: &[&str], expected: &str) {
    let out = kato(args);
    assert!(
        out.status.success(),
        "kato {}: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    let want = std::fs::read_to_string(golden(expected)).expect("golden file");
    assert_eq!(
        String::from_utf8(out.stdout).expect("utf-8 output"),
        want,
        "kato {}",
        args.join(" ")
    );
}

fn path(name: &str) -> String {
    golden(name).to_str().expect("utf-8 path").to_string()
}

#[test]
fn tate_census_structured_and_table() {
    let census = ["census", "--genus", "0", "--group", "C2", "--signature", "2,2,2,2"];
    assert_golden(&census, "tate.census");
    let mut table = vec!["--format", "table"];
    table.extend(census);
    assert_golden(&table, "tate.table");
}

#[test]
fn graph_commands() {
    assert_golden(&["validate", &path("tate.graph")], "tate.invariants");
    assert_golden(&["present", &path("tate.graph")], "tate.presentation");
    assert_golden(&["stabilize", &path("unstable.graph")], "unstable.stable");
    assert_golden(&["stabilize", &path("tate.graph")], "tate.graph");
    assert_golden(
        &["paste", &path("tate.graph"), "c0", &path("tate.graph"), "c3"],
        "tate-tate.graph",
    );
}

#[test]
fn out_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report");
    let out = kato(&[
        "census",
        "--genus",
        "0",
        "--group",
        "C2",
        "--signature",
        "2,2,2,2",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let want = std::fs::read_to_string(golden("tate.census")).unwrap();
    assert_eq!(std::fs::read_to_string(&file).unwrap(), want);
}

#[test]
fn check_passes_on_the_golden_report() {
    let out = kato(&["check", &path("tate.census"), "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("kato-check 1\n"));
    assert!(text.lines().filter(|l| l.starts_with("ok ")).count() >= 7);
    assert!(!text.contains("fail"));
}

#[test]
fn exit_codes() {
    let capped = kato(&[
        "census",
        "--genus",
        "0",
        "--group",
        "A4",
        "--signature",
        "2,3,3,3",
        "--max-vertices",
        "1",
    ]);
    assert_eq!(capped.status.code(), Some(3));
    assert!(!capped.stdout.is_empty(), "the partial report is still written");

    let unknown = kato(&["census", "--genus", "0", "--group", "Q8", "--signature", "2"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(kato(&["census", "--genus", "x"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graph");
    std::fs::write(&bad, "kato-graph 1\nvertex v0 C2\nvertex v1 C3\nend\n").unwrap();
    assert_eq!(kato(&["validate", bad.to_str().unwrap()]).status.code(), Some(1));
}
