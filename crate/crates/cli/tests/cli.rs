use std::process::{Command, Output};

use serde_json::Value;

fn nct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nct"))
        .args(args)
        .output()
        .expect("nct runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn schema() -> Value {
    let txt = include_str!("../../../docs/report.schema.json");
    serde_json::from_str(txt).expect("schema parses")
}

fn assert_valid(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = nct(&full);
    let report: Value =
        serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{:?}: {}", args, e));
    let v = jsonschema::validator_for(&schema()).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{:?}: {:?}", args, errors);
    report
}

#[test]
fn json_reports_follow_the_schema() {
    let cases: &[&[&str]] = &[
        &["symbols"],
        &[
            "parametrix",
            "--half",
            "forms",
            "--show",
            "b0,b1",
            "--verify",
            "--spot-check",
        ],
        &["integrate", "--half", "forms", "--stage", "radial"],
        &["curvature", "--graded", "--emit", "closedforms"],
        &["modfun", "--list"],
        &["modfun", "--eval", "W", "--at", "0.5,-1"],
        &["modfun", "--table", "K"],
        &["modfun", "--verify"],
        &["verify", "--suite", "golden,limits"],
        &["verify", "--suite", "radial", "--timing"],
        &[
            "pipeline",
            "--through",
            "curvature",
            "--spot-check",
            "--timing",
        ],
    ];
    for args in cases {
        assert_valid(args);
    }
}

#[test]
fn schema_rejects_broken_reports() {
    let mut report = assert_valid(&["verify", "--suite", "limits"]);
    let v = jsonschema::validator_for(&schema()).unwrap();
    report["suites"][0]["residuals"][0]["pass"] = Value::from("yes");
    assert!(!v.is_valid(&report));
    report.as_object_mut().unwrap().remove("suites");
    assert!(!v.is_valid(&report));
}

#[test]
fn timing_only_on_request() {
    let plain = assert_valid(&["verify", "--suite", "golden"]);
    assert!(plain.get("timing_ms").is_none());
    let timed = assert_valid(&["verify", "--suite", "golden", "--timing"]);
    assert!(timed["timing_ms"]["golden"].is_u64());
}

#[test]
fn runs_are_byte_identical() {
    for args in [
        &[
            "--json",
            "verify",
            "--suite",
            "closedforms,limits,commutative",
            "--seed",
            "5",
        ][..],
        &["pipeline", "--half", "forms", "--through", "logbasis"][..],
    ] {
        let a = nct(args);
        let b = nct(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{:?}", args);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(nct(&["verify", "--suite", "limits"]).status.code(), Some(0));
    assert_eq!(nct(&["verify", "--suite", "nope"]).status.code(), Some(64));
    assert_eq!(nct(&["verify", "--suite", "12"]).status.code(), Some(64));
    assert_eq!(
        nct(&["pipeline", "--through", "everything"]).status.code(),
        Some(64)
    );
    assert_eq!(nct(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(nct(&["--help"]).status.code(), Some(0));
    assert_eq!(
        nct(&["modfun", "--eval", "nope", "--at", "1"])
            .status
            .code(),
        Some(70)
    );
}

#[test]
fn suites_by_number_and_name_agree() {
    let a = nct(&["--json", "verify", "--suite", "6"]);
    let b = nct(&["--json", "verify", "--suite", "limits,limits"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn functions_pipeline_ends_in_the_basis_form() {
    let o = nct(&["pipeline", "--half", "functions", "--through", "grouped"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let grouped = &s[s.find("== grouped [functions]").expect("grouped stage")..];
    for f in [
        "f1(Δ)(k^-1*d1^2(k))",
        "f2(Δ)(k^-2*d1(k)*d1(k))",
        "F(Δ1,Δ2)((d1(k)*k^-1)·(k^-1*d1(k)))",
    ] {
        assert!(grouped.contains(f), "missing {}", f);
    }
    for name in ["f1", "f2", "F"] {
        assert!(
            grouped.contains(&format!("\n{} = ", name)),
            "no assembled {}",
            name
        );
    }
}

#[test]
fn forms_radial_stage_keeps_imaginary_tau_terms() {
    let o = nct(&["pipeline", "--half", "forms", "--through", "radial"]);
    let s = stdout(&o);
    let radial = &s[s.find("== radial [forms]").expect("radial stage")..];
    assert!(radial.contains("(1*I)*t2"));
    assert!(radial.contains("(-1*I)*t2"));
}

#[test]
fn spot_check_matches_every_term() {
    for half in ["functions", "forms"] {
        let r = assert_valid(&["parametrix", "--half", half, "--spot-check", "--show", "b2"]);
        let golden = r["golden"].as_array().unwrap();
        assert!(golden.len() >= 12);
        assert!(golden.iter().all(|g| g["matches"] == Value::Bool(true)));
        assert_eq!(r["pass"], Value::Bool(true));
    }
}

#[test]
fn commutative_limits_print() {
    let s = stdout(&nct(&["modfun", "--eval", "R1", "--at", "0"]));
    assert!(s.contains("R1(0, 0) = -3.333333333333333333"), "{}", s);
    let s = stdout(&nct(&["modfun", "--eval", "W", "--at", "0,0"]));
    assert!(s.contains("= -6.66666666666666666"), "{}", s);
}
