//! End-to-end tests driving the compiled binary on the bundled instances.

use std::fs;
use std::process::{Command, Output};

use mayer_cli::doc::{document_from_problem, parse_problem_str};
use mayer_cli::report::to_json;

fn mayer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mayer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problem(name: &str) -> String {
    format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_primal_rides_the_integrator_to_zero() {
    let out = mayer(&["solve-primal", &problem("e1.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert!(r["value"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(r["grid"], 2);
    let state = r["state"].as_array().unwrap();
    assert!((state[0][0].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert!(state[2][0].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn solve_dual_matches_the_primal_value() {
    let out = mayer(&["solve-dual", &problem("e1.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert!(r["value"].as_f64().unwrap().abs() <= 1e-9);
    for sample in r["xstar"].as_array().unwrap() {
        assert!((sample[0].as_f64().unwrap() + 1.0).abs() <= 1e-6);
    }
}

#[test]
fn gap_closes_on_the_integrator() {
    let out = mayer(&["gap", &problem("e1.json"), "--grid", "32"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert!(r["primal"].as_f64().unwrap().abs() <= 1e-9);
    assert!(r["dual"].as_f64().unwrap().abs() <= 1e-9);
    assert!(r["gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["pass"], true);
}

#[test]
fn gap_ladder_tracks_the_double_integrator_limit() {
    let out = mayer(&["gap", &problem("e2.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = json(&out);
    assert!((r["primal"].as_f64().unwrap() + 31.0 / 64.0).abs() <= 1e-9);
    assert_eq!(r["pass"], true);
    let ladder = r["ladder"].as_array().unwrap();
    assert_eq!(ladder.len(), 4);
    for row in ladder {
        let steps = row["grid"].as_f64().unwrap();
        let want = -(steps - 1.0) / (2.0 * steps);
        assert!((row["primal"].as_f64().unwrap() - want).abs() <= 1e-9);
        assert!(row["gap"].as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn certify_round_trips_through_the_dual_document() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("r.json");
    let out = mayer(&[
        "certify",
        &problem("e2.json"),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["pass"], true);

    let dual_path = dir.path().join("r.dual.json");
    let again = mayer(&[
        "certify",
        &problem("e2.json"),
        "--dual-in",
        dual_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));

    let mut dual: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&dual_path).unwrap()).unwrap();
    dual["xstar"][5][0] = serde_json::json!(dual["xstar"][5][0].as_f64().unwrap() + 100.0);
    let mutated_path = dir.path().join("mutated.dual.json");
    fs::write(&mutated_path, serde_json::to_string(&dual).unwrap()).unwrap();
    let rejected = mayer(&[
        "certify",
        &problem("e2.json"),
        "--dual-in",
        mutated_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&rejected), 2, "{}", stderr(&rejected));
    let r = json(&rejected);
    assert_eq!(r["pass"], false);
    let failing: Vec<&str> = r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["pass"] == false)
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(!failing.is_empty(), "the report names the failing entries");
}

#[test]
fn certify_rejects_a_grid_flag_disagreeing_with_the_dual_document() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("r.json");
    let out = mayer(&[
        "solve-dual",
        &problem("e2.json"),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dual_path = dir.path().join("r.dual.json");
    let clash = mayer(&[
        "certify",
        &problem("e2.json"),
        "--grid",
        "16",
        "--dual-in",
        dual_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&clash), 1);
    assert!(stderr(&clash).contains("disagrees"), "{}", stderr(&clash));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let e1 = problem("e1.json");
    let e2 = problem("e2.json");
    let cases: [Vec<&str>; 2] = [
        vec!["solve-primal", &e2, "--grid", "8"],
        vec!["certify", &e1],
    ];
    for args in &cases {
        let a = mayer(args);
        let b = mayer(args);
        assert_eq!(code(&a), 0, "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn out_files_land_next_to_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("p.json");
    let out = mayer(&[
        "solve-primal",
        &problem("e1.json"),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(&report_path).unwrap(), out.stdout);
    let table = fs::read_to_string(dir.path().join("p.trajectory.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "t,z0,v0,u0");
    assert_eq!(lines.len(), 4, "header plus one row per node");

    let dual_report = dir.path().join("d.json");
    let out = mayer(&[
        "solve-dual",
        &problem("e2.json"),
        "--out",
        dual_report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dual_doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.dual.json")).unwrap())
            .unwrap();
    assert_eq!(dual_doc["grid"], 32);
    assert_eq!(dual_doc["lambda"].as_array().unwrap().len(), 32);
    let adjoint = fs::read_to_string(dir.path().join("d.adjoint.csv")).unwrap();
    assert!(adjoint.lines().next().unwrap().contains("lambda1"));

    let gap_report = dir.path().join("g.json");
    let out = mayer(&[
        "gap",
        &problem("e1.json"),
        "--grid",
        "4",
        "--out",
        gap_report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("g.gap.csv")).unwrap();
    assert_eq!(table.lines().count(), 5, "header plus one row per ladder grid");
}

#[test]
fn adjoint_renders_the_chain_elimination() {
    let out = mayer(&["adjoint", &problem("e1.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["text"], "−x*′ = A₀ᵀx*");

    let dir = tempfile::tempdir().unwrap();
    let second = dir.path().join("second.json");
    fs::write(
        &second,
        r#"{"kind":"semilinear","kappa":2,"n":1,"r":1,
            "a":[[[1.0]],[[1.0]]],"b":[[1.0]],
            "u":{"lo":[-1.0],"hi":[1.0]},
            "q":[{"point":[0.0]},{"point":[0.0]}],
            "phi":{"pieces":[{"slope":[1.0,0.0],"offset":0.0}]}}"#,
    )
    .unwrap();
    let out = mayer(&["adjoint", second.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["text"], "η₁* = A₁ᵀx*; x*″ = A₀ᵀx* − A₁ᵀx*′");

    let out = mayer(&["adjoint", &problem("semilinear_k3.json")]);
    assert_eq!(
        json(&out)["text"],
        "η₁* = A₂ᵀx*; η₂* = A₁ᵀx* − A₂ᵀx*′; −x*‴ = A₀ᵀx* − A₁ᵀx*′ + A₂ᵀx*″"
    );

    let out = mayer(&["adjoint", &problem("e2.json")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = json(&out)["text"].as_str().unwrap().to_string();
    assert!(text.contains("λ″"), "{text}");
}

#[test]
fn oracle_routes_agree_on_the_transcribed_programs() {
    for name in ["e1.json", "e2.json", "semilinear_k3.json"] {
        let out = mayer(&["oracle", &problem(name)]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        let r = json(&out);
        assert_eq!(r["pass"], true, "{name}");
        assert_eq!(r["simplex"]["status"], "optimal", "{name}");
        assert_eq!(r["enumeration"]["status"], "optimal", "{name}");
    }
}

#[test]
fn malformed_documents_exit_one_with_the_field_named() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, &str)> = vec![
        (
            r#"{"kind":"semilinear","kappa":1,"n":1,"r":1,"a":[[[0.0]]],"b":[[1.0]],
               "u":{"lo":[-1.0],"hi":[1.0]},"q":[{"point":[1.0]}],
               "phi":{"pieces":[{"slope":[1.0],"offset":0.0}]},"bogus":3}"#,
            "unknown field `bogus`",
        ),
        (
            r#"{"kind":"semilinear","kappa":2,"n":1,"r":1,"a":[[[0.0]],[[0.0]]],"b":[[1.0]],
               "u":{"lo":[-1.0],"hi":[1.0]},"q":[{"point":[1.0]}],
               "phi":{"pieces":[{"slope":[1.0,0.0],"offset":0.0}]}}"#,
            "q: must have kappa entries (2), found 1",
        ),
        (
            r#"{"kind":"polyhedral2","kappa":2,"n":1,"a":[[0.0],[0.0]],"b":[[0.0],[0.0]],
               "c":[[-1.0],[1.0]],"d":[1.0,1.0,1.0],
               "q":[{"point":[0.0]},{"point":[0.0]}],
               "phi":{"pieces":[{"slope":[1.0,0.0],"offset":0.0}]}}"#,
            "d: expected one entry per graph row (2), found 3",
        ),
        (r#"{"kappa":1}"#, "kind: required"),
        (
            r#"{"kind":"semilinear","kappa":1,"n":1,"r":1,"a":[[[0.0]]],"b":[[1.0]],
               "u":{"lo":[-1.0],"hi":[1.0],"point":[0.0]},"q":[{"point":[1.0]}],
               "phi":{"pieces":[{"slope":[1.0],"offset":0.0}]}}"#,
            "exactly one of lo/hi, point, or g/h",
        ),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("case{i}.json"));
        fs::write(&path, body).unwrap();
        let out = mayer(&["solve-primal", path.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "case {i}");
        assert!(stderr(&out).contains(needle), "case {i}: {}", stderr(&out));
    }
}

#[test]
fn problem_documents_round_trip_canonically() {
    for name in ["e1.json", "e2.json", "semilinear_k3.json"] {
        let src = fs::read_to_string(problem(name)).unwrap();
        let first = parse_problem_str(&src).unwrap();
        let canonical = to_json(&document_from_problem(&first)).unwrap();
        let second = parse_problem_str(&canonical).unwrap();
        let again = to_json(&document_from_problem(&second)).unwrap();
        assert_eq!(canonical, again, "{name}");
        assert_eq!(
            document_from_problem(&first),
            document_from_problem(&second),
            "{name}"
        );
    }
}
