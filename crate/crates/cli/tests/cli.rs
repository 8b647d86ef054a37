use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::{json, Value};
use tempfile::TempDir;

use tlj_core::diagram::{compose_vertical, Morphism2};
use tlj_core::fixtures::LAMBDA1_JSON;
use tlj_core::graph::{standard_gamma, StandardKind};
use tlj_core::io::{gamma_document, morphism_document, serialize};

struct Run {
    code: i32,
    stdout: Vec<u8>,
    report: Value,
}

fn tlj_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tlj"));
    cmd.current_dir(dir).args(args).env_remove("TLJ_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let Output { status, stdout, .. } = cmd.output().unwrap();
    let code = status.code().unwrap();
    let report: Value = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    if code == 1 {
        let n = report["payload"]["violations"].as_array().map_or(0, Vec::len);
        assert!(n >= 1, "exit 1 without violations: {report}");
    }
    Run { code, stdout, report }
}

fn tlj(dir: &Path, args: &[&str]) -> Run {
    tlj_env(dir, args, &[])
}

fn codes(r: &Run) -> Vec<String> {
    r.report["payload"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["code"].as_str().unwrap().to_string())
        .collect()
}

fn error_code(r: &Run) -> &str {
    r.report["payload"]["data"]["error"]["code"].as_str().unwrap()
}

fn setup() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    std::fs::write(path.join("lambda1.json"), LAMBDA1_JSON).unwrap();
    (dir, path)
}

fn write_json(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_vec_pretty(v).unwrap()).unwrap();
}

#[test]
fn roundtrip_reports_an_isomorphism() {
    let (_t, dir) = setup();
    let r = tlj(&dir, &["roundtrip", "--fair-graph", "lambda1.json"]);
    assert_eq!(r.code, 0);
    let w = &r.report["payload"]["data"]["payload"];
    assert_eq!(w["type"], "isomorphism");
    assert_eq!(w["vertex_map"].as_object().unwrap().len(), 6);
    assert_eq!(w["edge_map"].as_object().unwrap().len(), 26);
}

#[test]
fn output_is_deterministic() {
    let (_t, dir) = setup();
    let a = tlj(&dir, &["roundtrip", "--fair-graph", "lambda1.json"]);
    let b = tlj(&dir, &["roundtrip", "--fair-graph", "lambda1.json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unbalanced_loops_name_their_weight_groups() {
    let (_t, dir) = setup();
    assert_eq!(tlj(&dir, &["gen", "--family", "gamma", "--params", "kind=unoriented", "weights=2", "-o", "g0.json"]).code, 0);
    write_json(
        &dir,
        "two.json",
        &json!({"kind": "fair_graph", "version": 1, "payload": {
            "gamma": "g0.json",
            "vertices": [{"id": "x", "pi": "a"}],
            "edges": [
                {"id": "p", "source": "x", "target": "x", "weight": 0.5, "pi": "e"},
                {"id": "q", "source": "x", "target": "x", "weight": 1.5, "pi": "e"}
            ]}}),
    );
    assert_eq!(tlj(&dir, &["fair", "--fair-graph", "two.json"]).code, 0);
    let r = tlj(&dir, &["balance", "--fair-graph", "two.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(codes(&r), ["UNMATCHED_WEIGHT_GROUP", "UNMATCHED_WEIGHT_GROUP"]);
    let r = tlj(&dir, &["build-solution", "--fair-graph", "two.json", "-o", "s.json"]);
    assert_eq!(r.code, 1);
    assert!(!dir.join("s.json").exists());
}

#[test]
fn unfair_graph_fails_the_fairness_check() {
    let (_t, dir) = setup();
    let mut v: Value = serde_json::from_str(LAMBDA1_JSON).unwrap();
    let edges = v["payload"]["edges"].as_array_mut().unwrap();
    let w = edges[0]["weight"].as_f64().unwrap();
    edges[0]["weight"] = json!(w + 0.25);
    write_json(&dir, "bad.json", &v);
    let r = tlj(&dir, &["fair", "--fair-graph", "bad.json"]);
    assert_eq!(r.code, 1);
    assert!(codes(&r).iter().all(|c| c == "UNFAIR"));
}

#[test]
fn build_classify_and_compare() {
    let (_t, dir) = setup();
    assert_eq!(tlj(&dir, &["build-solution", "--fair-graph", "lambda1.json", "-o", "s.json"]).code, 0);
    assert_eq!(tlj(&dir, &["classify", "--solution", "s.json", "-o", "back.json"]).code, 0);
    let r = tlj(&dir, &["iso", "--a", "lambda1.json", "--b", "back.json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["payload"]["data"]["payload"]["type"], "isomorphism");
    assert_eq!(tlj(&dir, &["equiv", "--a", "s.json", "--b", "s.json", "--fuzz", "3"]).code, 0);
}

#[test]
fn eval_of_a_closed_loop_is_delta_times_identity() {
    let (_t, dir) = setup();
    let g = Arc::new(standard_gamma(StandardKind::Oriented, &[2.5]).unwrap());
    std::fs::write(dir.join("g.json"), serialize(&gamma_document(&g))).unwrap();
    let e = g.edge_ix("e").unwrap();
    let m = compose_vertical(&Morphism2::cup(g.clone(), e).unwrap(), &Morphism2::cap(g.clone(), e).unwrap()).unwrap();
    std::fs::write(dir.join("loop.json"), serialize(&morphism_document(&m))).unwrap();
    assert_eq!(tlj(&dir, &["gen", "--family", "random-solution", "--gamma", "g.json", "-o", "s.json"]).code, 0);
    let r = tlj(&dir, &["eval", "--solution", "s.json", "--morphism", "loop.json", "-o", "op.json"]);
    assert_eq!(r.code, 0);
    let blocks = r.report["payload"]["data"]["operator"]["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        let z = &b["matrix"][0][0];
        assert!((z[0].as_f64().unwrap() - 2.5).abs() < 1e-12 && z[1].as_f64().unwrap().abs() < 1e-12);
        assert_eq!(b["domain"], b["codomain"]);
    }
    assert_eq!(std::fs::read(dir.join("op.json")).unwrap(), r.stdout);
}

#[test]
fn mw_reports_the_bad_cycle() {
    let (_t, dir) = setup();
    assert_eq!(tlj(&dir, &["gen", "--family", "two-vertex", "--params", "a=2", "-o", "tv.json"]).code, 0);
    let r = tlj(&dir, &["mw", "--fair-graph", "tv.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(codes(&r), ["INCONSISTENT_CYCLE"]);
    let c = &r.report["payload"]["data"]["payload"];
    assert_eq!(c["type"], "cycle");
    assert!((c["product"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(tlj(&dir, &["mw", "--fair-graph", "lambda1.json"]).code, 0);
}

#[test]
fn inequivalent_solutions() {
    let (_t, dir) = setup();
    assert_eq!(tlj(&dir, &["gen", "--family", "gamma", "--params", "kind=oriented", "weights=2.5", "-o", "g.json"]).code, 0);
    let gen = |seed: &str, sheets: &str, out: &str| {
        let args = ["gen", "--family", "random-solution", "--gamma", "g.json", "--params", sheets, "--seed", seed, "-o", out];
        assert_eq!(tlj(&dir, &args).code, 0);
    };
    gen("1", "sheets=1", "s1.json");
    gen("2", "sheets=1", "s2.json");
    gen("3", "sheets=2", "s3.json");
    assert_eq!(tlj(&dir, &["equiv", "--a", "s1.json", "--b", "s2.json"]).code, 0);
    let r = tlj(&dir, &["equiv", "--a", "s1.json", "--b", "s3.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(codes(&r), ["NOT_EQUIVALENT"]);
}

#[test]
fn seed_comes_from_the_environment_first() {
    let (_t, dir) = setup();
    let gen = |out: &str, seed: &str, env: &[(&str, &str)]| {
        let args = ["gen", "--family", "relabel", "--fair-graph", "lambda1.json", "--seed", seed, "-o", out];
        assert_eq!(tlj_env(&dir, &args, env).code, 0);
        std::fs::read(dir.join(out)).unwrap()
    };
    let a = gen("a.json", "5", &[]);
    let b = gen("b.json", "5", &[]);
    let c = gen("c.json", "6", &[]);
    let d = gen("d.json", "6", &[("TLJ_SEED", "5")]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a, d);
}

#[test]
fn negative_weight_is_a_validation_failure() {
    let (_t, dir) = setup();
    write_json(
        &dir,
        "neg.json",
        &json!({"kind": "gamma", "version": 1, "payload": {
            "vertices": ["a"],
            "edges": [{"id": "e", "source": "a", "target": "a", "weight": -1.0, "dual": "e"}]}}),
    );
    let r = tlj(&dir, &["validate", "--gamma", "neg.json"]);
    assert_eq!(r.code, 1);
    assert!(codes(&r).contains(&"NONPOSITIVE_WEIGHT".to_string()));
}

#[test]
fn input_errors_exit_with_two() {
    let (_t, dir) = setup();
    std::fs::write(dir.join("broken.json"), "{ nope").unwrap();
    write_json(&dir, "v99.json", &json!({"kind": "gamma", "version": 99, "payload": {}}));
    let mut v: Value = serde_json::from_str(LAMBDA1_JSON).unwrap();
    v["payload"]["edges"][0]["colour"] = json!("red");
    write_json(&dir, "extra.json", &v);

    let r = tlj(&dir, &["validate", "--gamma", "broken.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "MALFORMED_JSON"));
    let r = tlj(&dir, &["validate", "--gamma", "v99.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "VERSION_UNSUPPORTED"));
    let r = tlj(&dir, &["fair", "--fair-graph", "extra.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "SCHEMA_VIOLATION"));
    let r = tlj(&dir, &["validate", "--gamma", "lambda1.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "KIND_MISMATCH"));
    let r = tlj(&dir, &["fair", "--fair-graph", "missing.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "FILE_ERROR"));
    assert_eq!(tlj(&dir, &["fair"]).code, 2);
    assert_eq!(tlj(&dir, &["--tol", "-1", "fair", "--fair-graph", "lambda1.json"]).code, 2);
    let r = tlj(&dir, &["gen", "--family", "a-path", "--params", "m=3", "-o", "x.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "INVALID_PARAMS"));
}

#[test]
fn supplied_gamma_is_authoritative() {
    let (_t, dir) = setup();
    assert_eq!(tlj(&dir, &["gen", "--family", "gamma", "--params", "kind=unoriented", "weights=2", "-o", "g0.json"]).code, 0);
    let r = tlj(&dir, &["fair", "--gamma", "g0.json", "--fair-graph", "lambda1.json"]);
    assert_eq!((r.code, error_code(&r)), (2, "GAMMA_CONFLICT"));
}
