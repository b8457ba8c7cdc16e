use std::path::PathBuf;
use std::process::Command;

use bartor_cli::document::{parse_presentation, render};
use bartor_cli::run;
use proptest::prelude::*;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn bartor(args: &[&str]) -> bartor_cli::Outcome {
    run(std::iter::once("bartor").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut v: Vec<&str> = args.to_vec();
    v.extend(["--output", "json"]);
    let out = bartor(&v);
    (serde_json::from_str(&out.stdout).expect("json report"), out.code)
}

fn betti(v: &Value) -> Vec<u64> {
    v["betti"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

fn write_doc(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn circle_action_full_run_passes_crosscheck() {
    let f = data("s2-circle.alg");
    let (v, code) = json(&["tor", "--max-degree", "12", "--ring", "--mode", "both", &f]);
    assert_eq!(code, 0);
    assert_eq!(betti(&v), vec![1; 13]);
    assert_eq!(v["crosscheck"]["passed"], Value::Bool(true));
    assert!(!v["ring_constants"].as_array().unwrap().is_empty());
}

#[test]
fn lambda_cohomology_is_one_per_degree() {
    let (v, code) = json(&["cohomology", "--max-degree", "6", &data("lambda-uxy.alg")]);
    assert_eq!(code, 0);
    assert_eq!(betti(&v), vec![1; 7]);
    let reps: Vec<&str> = v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["representative"].as_str().unwrap())
        .collect();
    assert_eq!(reps[3], "x*y");
    assert_eq!(reps[5], "x*y^2");
}

#[test]
fn check_suite_passes_on_circle_input() {
    let out = bartor(&["check", &data("s2-circle.alg")]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.stdout.contains("over-k/homotopy"));
    assert!(!out.stdout.contains("FAIL"));
}

#[test]
fn inhomogeneous_relation_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(
        &dir,
        "bad.alg",
        "algebra H\ngenerator u degree 2\ngenerator x degree 2\nrbase u\nrelation x^2 - u\n",
    );
    let (v, code) = json(&["tor", &f]);
    assert_eq!(code, 1);
    assert_eq!(v["reason"], "homogeneity");
    assert_eq!(v["line"], 5);
    assert_eq!(v["status"], "error");
}

#[test]
fn tor_rejects_a_differential() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(
        &dir,
        "d.alg",
        "algebra A\ngenerator x degree 1\ngenerator u degree 2\ndifferential x -> u\n",
    );
    let (v, code) = json(&["tor", &f]);
    assert_eq!(code, 1);
    assert_eq!(v["reason"], "nonzero-differential");
    let (v, code) = json(&["tor", &data("lambda-uxy.alg")]);
    assert_eq!((code, v["reason"].as_str()), (1, Some("nonzero-differential")));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_doc(&dir, "s.alg", "algebra H\ngenerator x degree 2\nrelation 2x^2\n");
    let (v, code) = json(&["cohomology", &f]);
    assert_eq!(code, 1);
    assert_eq!(v["reason"], "syntax");
    assert_eq!(v["line"], 3);
    assert!(v["column"].as_u64().is_some());
}

#[test]
fn usage_and_io_errors_have_reasons() {
    let out = bartor(&["tor", "--no-such-flag", "x.alg"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("reason: usage"));
    let (v, code) = json(&["tor", "/definitely/not/here.alg"]);
    assert_eq!((code, v["reason"].as_str()), (1, Some("io")));
    let out = bartor(&["--help"]);
    assert_eq!(out.code, 0);
}

#[test]
fn massey_witness_on_lambda() {
    let (v, code) = json(&["massey", "--classes", "x,u,x", &data("lambda-uxy.alg")]);
    assert_eq!(code, 0);
    assert_eq!(v["defined"], true);
    assert_eq!(v["contains_zero"], false);
    assert_eq!(v["indeterminacy"].as_array().unwrap().len(), 0);
    let c = v["class"][0].as_str().unwrap();
    assert!(c == "2" || c == "-2", "{c}");
}

#[test]
fn homotopy_over_base_and_over_k_differ() {
    let (v, code) = json(&["homotopy", "--mode", "both", "--max-degree", "4", &data("lambda-uxy.alg")]);
    assert_eq!(code, 0);
    assert_eq!(v["pi_over_r"]["1"], 1);
    assert_eq!(v["pi_over_r"]["2"], 0);
    assert_eq!(v["pi_over_k"]["2"], 2);
}

#[test]
fn oracle_mismatch_exits_two_with_first_divergence() {
    let (v, code) = json(&[
        "tor",
        "--max-degree",
        "6",
        "--ring",
        "--oracle",
        &data("loop-sphere.alg"),
        &data("s2-circle.alg"),
    ]);
    assert_eq!(code, 2);
    assert_eq!(v["reason"], "crosscheck-failed");
    assert_eq!(v["crosscheck"]["first_divergence"]["degree"], 3);
}

#[test]
fn rationals_are_strings() {
    let (v, _) = json(&["tor", "--max-degree", "4", "--ring", &data("s2-circle.alg")]);
    for g in v["generators"].as_array().unwrap() {
        for t in g["terms"].as_array().unwrap() {
            assert!(t["coefficient"].is_string());
        }
    }
    for r in v["ring_constants"].as_array().unwrap() {
        if let Some(p) = r["product"].as_array() {
            assert!(p.iter().all(Value::is_string));
        }
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let f = data("s2-circle.alg");
    let args = ["tor", "--max-degree", "8", "--ring", "--mode", "both", "--representatives", &f];
    let a = bartor(&args);
    let b = bartor(&args);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().display().to_string();
    let mut with_cache = args.to_vec();
    with_cache.extend(["--cache-dir", &cache]);
    let c = bartor(&with_cache);
    let d = bartor(&with_cache);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    assert_eq!(c.stdout, a.stdout);
    assert_eq!(d.stdout, a.stdout);
}

#[test]
fn binary_exit_code_and_streams() {
    let out = Command::new(env!("CARGO_BIN_EXE_bartor"))
        .args(["tor", "--max-degree", "3", &data("point.alg")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time:"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("time:"));
    let out = Command::new(env!("CARGO_BIN_EXE_bartor"))
        .args(["tor", &data("lambda-uxy.alg")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn coeff() -> impl Strategy<Value = String> {
    (-5i64..=5, 1i64..=4).prop_map(|(p, q)| if q == 1 { p.to_string() } else { format!("{p}/{q}") })
}

/// Degree-4 relations in `a`, `b` (degree 2) and `c` (degree 4).
fn relation() -> impl Strategy<Value = String> {
    prop::collection::vec(coeff(), 4).prop_map(|cs| {
        let mons = ["a^2", "a*b", "b^2", "c"];
        cs.iter()
            .zip(mons)
            .map(|(c, m)| format!("({c})*{m}"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn render_then_parse_is_identity(rels in prop::collection::vec(relation(), 0..3), with_base in any::<bool>()) {
        let mut text = String::from("algebra T\ngenerator a degree 2\ngenerator b degree 2\ngenerator c degree 4\n");
        if with_base {
            text.push_str("rbase a\n");
        }
        for r in &rels {
            text.push_str(&format!("relation {r}\n"));
        }
        let Ok(p) = parse_presentation(&text) else {
            // a relation can involve the base alone, which is rejected
            return Ok(());
        };
        let r = render(&p);
        let back = parse_presentation(&r).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(render(&back), r);
    }
}
