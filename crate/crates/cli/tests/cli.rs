use std::process::{Command, Output};

fn cosma(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosma")).args(args).current_dir(dir).env("COSMA_COLOR", "0").output().unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn emitted_examples_are_complete() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cosma(dir.path(), &["examples", "--emit", "."]).status.success());
    for f in ["tlc.csm", "tlc_car.csm", "tlc_queries.tq"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let lint = cosma(dir.path(), &["lint", "tlc.csm"]);
    assert_eq!(lint.status.code(), Some(0), "{}", text(&lint));
}

#[test]
fn bare_asset_names_fall_back_to_bundled_copies() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosma(dir.path(), &["rg", "tlc_car.csm"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(text(&out).contains("15 reachable states out of 72"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cosma(dir.path(), &["rg", "missing.csm"]).status.code(), Some(2));
    assert_eq!(cosma(dir.path(), &["vhdl", "tlc.csm", "--state-encoding", "gray"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.csm"), "system S { machine M { init a; state a { -> b when 1; } } }").unwrap();
    let bad = cosma(dir.path(), &["lint", "bad.csm"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(text(&bad).contains("bad.csm:1:"), "{}", text(&bad));
    std::fs::write(dir.path().join("f.tq"), "f: always (HG => next FG);\n").unwrap();
    assert_eq!(cosma(dir.path(), &["check", "tlc.csm", "-q", "f.tq"]).status.code(), Some(1));
}

#[test]
fn dot_and_json_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let dot = cosma(dir.path(), &["rg", "tlc.csm", "--dot", "-"]);
    let body = String::from_utf8_lossy(&dot.stdout);
    assert!(body.contains("digraph"));
    let json = cosma(dir.path(), &["rg", "tlc.csm", "--engine", "both", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["reachable"], 13);
    assert_eq!(v["product_size"], 36);
}

#[test]
fn sequential_flag_gives_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let a = cosma(dir.path(), &["check", "tlc.csm", "-q", "tlc_queries.tq", "--json"]);
    let b = cosma(dir.path(), &["--sequential", "check", "tlc.csm", "-q", "tlc_queries.tq", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains('\u{1b}'));
}
