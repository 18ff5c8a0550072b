use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_perkh")).args(args).output().expect("spawn perkh");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, out) = run(args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn blocks(v: &Value) -> Vec<(i64, i64, Option<i64>, i64)> {
    v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| (b["i"].as_i64().unwrap(), b["q"].as_i64().unwrap(), b["k"].as_i64(), b["dim"].as_i64().unwrap()))
        .collect()
}

#[test]
fn kh_of_hopf() {
    let (code, r) = run_json(&["kh", &example("hopf2.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "n/a");
    assert_eq!(blocks(&r["result"]), vec![(0, 0, None, 1), (0, 2, None, 1), (2, 4, None, 1), (2, 6, None, 1)]);
}

#[test]
fn akh_of_hopf_quotient() {
    let (code, r) = run_json(&["akh", &example("hopf-quotient.json")]);
    assert_eq!(code, 0);
    let mut got = blocks(&r["result"]);
    got.sort();
    assert_eq!(got, vec![(0, -1, Some(-2), 1), (0, 1, Some(0), 1), (0, 3, Some(2), 1), (1, 3, Some(0), 1)]);
}

#[test]
fn ekh_splits_all_of_kh() {
    let (code, r) = run_json(&["ekh", &example("hopf2.json"), "--p", "2", "--n", "1", "--r", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["total"], 4);
}

#[test]
fn ekh_rejects_non_generating_field() {
    // 7 ≡ 1 mod 3 has order 1, not φ(3)
    let (code, _) = run(&["ekh", &example("trefoil-3periodic.json"), "--p", "3", "--r", "7"]);
    assert_eq!(code, 3);
}

#[test]
fn borel_stabilizes_on_hopf() {
    let (code, r) = run_json(&["borel", &example("hopf2.json"), "--p", "2", "--max-degree", "12"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["result"]["stable_total"], 4);
}

#[test]
fn borel_on_trefoil() {
    let (code, r) = run_json(&["borel", &example("trefoil-3periodic.json"), "--p", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["stable_total"], 4);
}

#[test]
fn borel_rejects_composite_order() {
    assert_eq!(run(&["borel", &example("hopf2.json"), "--p", "4"]).0, 3);
}

#[test]
fn verify_sweeps_pass() {
    for (file, which) in [
        ("hopf2.json", "smith"),
        ("trefoil-3periodic.json", "smith"),
        ("t25-5periodic.json", "smith"),
        ("hopf2.json", "counting"),
        ("trefoil-3periodic.json", "counting"),
        ("hopf2.json", "fixed-gens"),
        ("trefoil-3periodic.json", "fixed-gens"),
        ("permutohedra.json", "permutohedra"),
    ] {
        let (code, r) = run_json(&["verify", &example(file), which]);
        assert_eq!((code, r["verdict"].as_str()), (0, Some("pass")), "{file} {which}");
    }
}

#[test]
fn symmetric_sweeps_need_a_symmetry() {
    assert_eq!(run(&["verify", &example("hopf-quotient.json"), "smith"]).0, 3);
}

#[test]
fn periodicity_verdicts() {
    let (code, r) = run_json(&["periodicity", &example("trefoil-khp.json"), "--p", "3", "--s", "2", "--c", "1"]);
    assert_eq!(code, 0);
    assert!(r["result"]["count"].as_u64().unwrap() >= 1);
    let (code, _) = run_json(&["periodicity", &example("unknot-khp.json"), "--p", "5", "--s", "0"]);
    assert_eq!(code, 0);
    let (code, r) = run_json(&["periodicity", &example("anchor-missing.json"), "--p", "3", "--s", "0"]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["count"], 0);
}

#[test]
fn quotient_then_lift_round_trips() {
    let (code, q) = run_json(&["quotient", &example("hopf2.json")]);
    assert_eq!(code, 0);
    let path = std::env::temp_dir().join(format!("perkh-quotient-{}.json", std::process::id()));
    std::fs::write(&path, q["result"].to_string()).unwrap();
    let (code, l) = run_json(&["lift", path.to_str().unwrap(), "--p", "2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 0);
    let lifted = perkh_core::parse_diagram(&l["result"].to_string()).unwrap();
    let original = perkh_core::parse_diagram(&std::fs::read_to_string(example("hopf2.json")).unwrap()).unwrap();
    assert!(perkh_core::is_isomorphic(&lifted, &original));
}

#[test]
fn permutohedron_section() {
    let (code, r) = run_json(&["permutohedron", "--s", "1,2,3,4", "--partition", "1|2,3|4", "--equal", "2,3"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["section"]["image"], "({1},{2},{3})");
    assert_eq!(r["result"]["vertices"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_input_exits_three() {
    let path = std::env::temp_dir().join(format!("perkh-bad-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"crossings": [{"edges": [1,2,3,4], "sign": 1}]}"#).unwrap();
    let code = run(&["kh", path.to_str().unwrap()]).0;
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 3);
    assert_eq!(run(&["kh", "/nonexistent/diagram.json"]).0, 3);
}

#[test]
fn reports_are_reproducible() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v.to_string()
    };
    for args in [
        vec!["akh".to_string(), example("hopf2.json")],
        vec!["verify".into(), example("trefoil-3periodic.json"), "counting".into()],
        vec!["periodicity".into(), example("trefoil-khp.json"), "--p".into(), "3".into(), "--s".into(), "2".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = strip(run_json(&args).1);
        let mut threaded = args.clone();
        threaded.extend(["--threads", "1"]);
        let b = strip(run_json(&threaded).1);
        assert_eq!(a, b);
    }
}

#[test]
fn pretty_output_is_a_table() {
    let (code, out) = run(&["kh", &example("hopf2.json"), "--pretty"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict  n/a"));
    assert!(out.lines().any(|l| l.trim_start().starts_with("6 |")));
}
