use std::io::Write;
use std::process::{Command, Stdio};

use laxdyn::run_args;
use laxdyn_core::fixtures::NAMES;
use serde_json::Value;

fn run(args: &[&str]) -> (String, String, i32) {
    run_args(std::iter::once("laxdyn").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let (out, err, code) = run(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
    serde_json::from_str(&out).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn every_fixture_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    for name in NAMES {
        let (doc, _, code) = run(&["examples", name]);
        assert_eq!(code, 0);
        let path = write_temp(&dir, &format!("{name}.json"), &doc);
        let from_file = run(&["validate", &path]);
        let from_fixture = run(&["validate", &format!("examples:{name}")]);
        assert_eq!(from_file, from_fixture, "{name}");
        let value: Value = serde_json::from_str(&doc).unwrap();
        if value.get("members").is_none() {
            let (iso, _, code) = run(&["iso-check", &path, &format!("examples:{name}")]);
            assert_eq!(code, 0, "{name}: {iso}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["global", "examples:borromean_family", "--mode", "transparent"][..],
        &["connectivity", "examples:borromean_family"],
        &["realize", "examples:upsilon", "--format", "table"],
        &["laws", "--cases", "20", "--seed", "7"],
    ] {
        assert_eq!(run(args), run(args));
    }
}

#[test]
fn gamma_is_lax_not_strict() {
    let v = json(&["validate", "examples:gamma"]);
    assert_eq!(v["summary"], "lax, not strict");
    assert_eq!(v["classification"], "hyper_deterministic");
}

#[test]
fn borromean_connectivity() {
    let v = json(&["connectivity", "examples:borromean_family"]);
    assert_eq!(v["plain"], "integral borromean");
    assert_eq!(v["manifest"], "integral borromean");
}

#[test]
fn demanded_global_dynamic_matches_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _, code) = run(&["global", "examples:borromean_family"]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&g).unwrap();
    assert_eq!(report["m"].as_array().unwrap().len(), 56);
    assert_eq!(report["blocks"].as_object().unwrap().len(), 2);
    let path = write_temp(&dir, "global.json", &g);
    let (_, _, code) = run(&["iso-check", &path, "examples:u_global"]);
    assert_eq!(code, 0);
}

#[test]
fn j_globals_sit_between_opaque_and_transparent() {
    let blocks = |args: &[&str]| json(args)["blocks"].as_object().unwrap().len();
    let fam = "examples:borromean_family";
    assert_eq!(blocks(&["global", fam, "--mode", "opaque"]), 1);
    assert_eq!(blocks(&["global", fam, "--mode", "j"]), 1);
    assert_eq!(blocks(&["global", fam, "--mode", "j", "--j", "1,2,3"]), 56);
    let mid = blocks(&["global", fam, "--mode", "j", "--j", "1,2"]);
    assert!(1 < mid && mid < 56);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["iso-check", "examples:upsilon", "examples:upsilon_star"]).2, 1);
    assert_eq!(run(&["control-system", "examples:gamma"]).2, 1);
    assert_eq!(run(&["global", "examples:borromean_family", "--j", "1"]).2, 2);
    assert_eq!(run(&["global", "examples:borromean_family", "--mode", "j", "--j", "9"]).2, 2);
    assert_eq!(run(&["realize", "examples:nope"]).2, 2);
    assert_eq!(run(&["realize", "examples:borromean_family"]).2, 2);
    assert_eq!(run(&["frobnicate"]).2, 2);
    assert_eq!(run(&["--cap", "0", "realize", "examples:phi"]).2, 2);
    assert_eq!(run(&["--cap", "1", "realize", "examples:upsilon"]).2, 3);
    assert_eq!(run(&["laws", "--cases", "10"]).2, 0);
}

#[test]
fn invalid_documents_are_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (doc, _, _) = run(&["examples", "phi"]);
    let mut v: Value = serde_json::from_str(&doc).unwrap();
    v["rho"]["0"] = Value::String("nowhere".into());
    let path = write_temp(&dir, "bad.json", &v.to_string());
    let (_, err, code) = run(&["validate", &path]);
    assert!(code == 1 || code == 2, "{err}");
    let path = write_temp(&dir, "junk.json", "{ not json");
    assert_eq!(run(&["validate", &path]).2, 2);
}

#[test]
fn binary_reads_stdin_and_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_laxdyn");
    let (doc, _, _) = run(&["examples", "upsilon"]);
    let mut child = Command::new(bin)
        .args(["realize", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(doc.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], 20);

    let status = Command::new(bin)
        .args(["iso-check", "examples:phi", "examples:gamma"])
        .stdout(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
