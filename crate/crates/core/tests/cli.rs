use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const REFERENCE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/reference.json");

fn qfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfc")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn reproduction_summary() {
    let out = qfc(&["run", "--config", REFERENCE]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = String::from_utf8(out.stdout).unwrap();
    for needle in ["0.726", "0.698", "M=159", "P_opt=360 µW"] {
        assert!(s.contains(needle), "missing {needle:?} in\n{s}");
    }
}

#[test]
fn outputs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let out = qfc(&["run", "--config", REFERENCE, "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "report.json"));
    assert!(names.iter().any(|n| n == "summary.txt"));
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }
}

#[test]
fn bad_config_exits_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{"simulate": {"points": "many"}}"#);
    let out = qfc(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulate.points"));
}

#[test]
fn unknown_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", r#"{"ring": {"radius_um": 74, "colour": 1}}"#);
    assert_eq!(qfc(&["design", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn empty_task_list_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "empty.json", r#"{"tasks": []}"#);
    assert_eq!(qfc(&["run", "--config", &cfg]).status.code(), Some(0));
}

#[test]
fn missing_trace_is_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "fit.json", r#"{"tasks": ["fit"], "fit": {"trace_csv": "nope.csv"}}"#);
    let out = qfc(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn single_subcommand_runs_one_task() {
    let out = qfc(&["budget", "--config", REFERENCE]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("budget:"), "{s}");
}
