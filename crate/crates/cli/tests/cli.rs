//! End-to-end runs of the `lipfree` binary on the bundled scenarios.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn lipfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfree")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = lipfree(args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), report)
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("lipfree-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// True when every JSON number in the document is an integer.
fn integers_only(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(a) => a.iter().all(integers_only),
        Value::Object(o) => o.values().all(integers_only),
        _ => true,
    }
}

#[test]
fn bundled_scenarios_exit_codes() {
    let expected = [
        ("line-antipodal.json", 0),
        ("plane-l1-quarter.json", 0),
        ("plane-linf-diagonals.json", 0),
        ("c2-l1-quarter.json", 0),
        ("octagon-quarter.json", 0),
        ("eighth-roots-float.json", 0),
        ("square-rotation.json", 0),
        ("cube-lift.json", 0),
        ("broken-triangle.json", 3),
    ];
    for (name, code) in expected {
        let path = scenario(name);
        let (got, report) = run(&["run", path_str(&path)]);
        assert_eq!(got, code, "{name}");
        assert_eq!(report["exit_code"], code, "{name}");
    }
}

#[test]
fn line_example_report() {
    let path = scenario("line-antipodal.json");
    let (code, report) = run(&["run", path_str(&path)]);
    assert_eq!(code, 0);
    let tasks = report["tasks"].as_array().unwrap();
    let find = |kind: &str| tasks.iter().find(|t| t["task"] == kind).unwrap();
    let avg = &find("average")["results"];
    assert_eq!(avg["deviation_before"]["witness"], serde_json::json!([["-1"]]));
    assert_ne!(avg["deviation_before"]["max_deviation"], "0");
    assert_eq!(avg["deviation_after"], "0");
    assert_eq!(avg["op_norm"], "1");
    assert_eq!(avg["lifting"]["rows"], serde_json::json!([["1/2"], ["-1/2"]]));
    assert_eq!(find("split")["checks"]["round_trip"], true);
    // P f is the linear function x ↦ x (f(1) - f(-1)) / 2 with f(1) = 3, f(-1) = 1.
    assert_eq!(find("dualize")["results"]["image"], serde_json::json!([["0", "0"], ["1", "1"], ["-1", "-1"]]));
    assert_eq!(find("equivariant-lift")["results"]["value"], "1");
}

#[test]
fn complexification_report() {
    let path = scenario("plane-l1-quarter.json");
    let (code, report) = run(&["complexify", path_str(&path)]);
    assert_eq!(code, 0);
    let tasks = report["tasks"].as_array().unwrap();
    assert_eq!(tasks.len(), 1);
    let c = &tasks[0];
    assert_eq!(c["checks"]["q_idempotent"], true);
    assert_eq!(c["checks"]["q_norm_at_most_sqrt2"], true);
    assert_eq!(c["checks"]["delta_c_isometric"], true);
    assert_eq!(c["results"]["idempotence_residual"], "0");
}

#[test]
fn broken_triangle_names_the_triple() {
    let path = scenario("broken-triangle.json");
    let (code, report) = run(&["validate", path_str(&path)]);
    assert_eq!(code, 3);
    let witness = &report["error"]["witness"][0];
    assert_eq!(witness["kind"], "triangle");
    assert_eq!(witness["points"], serde_json::json!(["a", "b", "c"]));
}

#[test]
fn reports_are_deterministic() {
    for name in ["line-antipodal.json", "square-rotation.json", "eighth-roots-float.json"] {
        let path = scenario(name);
        let strip = |out: Output| {
            let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
            v.as_object_mut().unwrap().remove("generated_at");
            serde_json::to_string(&v).unwrap()
        };
        let a = strip(lipfree(&["run", path_str(&path)]));
        let b = strip(lipfree(&["--parallel", "2", "run", path_str(&path)]));
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn exact_reports_have_no_float_literals() {
    for name in ["line-antipodal.json", "plane-l1-quarter.json", "octagon-quarter.json", "square-rotation.json", "cube-lift.json"] {
        let path = scenario(name);
        let out = lipfree(&["run", path_str(&path)]);
        let text = String::from_utf8(out.stdout).unwrap();
        let report: Value = serde_json::from_str(&text).unwrap();
        assert!(integers_only(&report), "{name}");
    }
}

#[test]
fn parse_errors_exit_2() {
    let bad = temp_file("bad.json", "{ \"tasks\": [ { \"task\": \"validate\" } ");
    assert_eq!(run(&["run", path_str(&bad)]).0, 2);
    let unknown = temp_file("unknown.json", r#"{ "tasks": [ { "task": "shuffle" } ] }"#);
    assert_eq!(run(&["run", path_str(&unknown)]).0, 2);
    let float = temp_file(
        "float.json",
        r#"{ "mode": "exact", "space": { "norm": "l1", "points": [[0], [0.5]] }, "tasks": [ { "task": "validate" } ] }"#,
    );
    assert_eq!(run(&["run", path_str(&float)]).0, 2);
    // The same literal is fine in float mode.
    assert_eq!(run(&["--mode", "float", "run", path_str(&float)]).0, 0);
    assert_eq!(run(&["run", "/nonexistent/scenario.json"]).0, 2);
}

#[test]
fn exact_mode_rejects_irrational_rotations() {
    let path = scenario("eighth-roots-float.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["mode"] = "exact".into();
    doc["space"] = serde_json::json!({ "norm": "l1", "points": [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]] });
    let file = temp_file("k8.json", &doc.to_string());
    let (code, report) = run(&["run", path_str(&file)]);
    assert_eq!(code, 3);
    assert!(report["tasks"][1]["error"].as_str().unwrap().contains("float mode"));
}

#[test]
fn capacity_errors_exit_4() {
    let path = scenario("square-rotation.json");
    assert_eq!(run(&["--cap", "group=2", "run", path_str(&path)]).0, 4);
    let cube = temp_file("cube.json", r#"{ "tasks": [ { "task": "cube-lift", "d": 3, "q": 9, "norm": "l1" } ] }"#);
    assert_eq!(run(&["--cap", "grid=100", "run", path_str(&cube)]).0, 4);
    assert_eq!(run(&["--cap", "nope=1", "run", path_str(&path)]).0, 2);
}

#[test]
fn invariant_failures_exit_5() {
    // The coarse ℓ∞ cube in three dimensions has a lifting of norm 3/2,
    // beyond the default 1/10 allowance.
    let cube = temp_file("coarse.json", r#"{ "tasks": [ { "task": "cube-lift", "d": 3, "q": 1, "norm": "linf" } ] }"#);
    let (code, report) = run(&["run", path_str(&cube)]);
    assert_eq!(code, 5);
    assert_eq!(report["tasks"][0]["results"]["op_norm"], "3/2");
    assert_eq!(report["tasks"][0]["checks"]["op_norm_within"], false);
    let path = scenario("line-antipodal.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["tasks"] = serde_json::json!([{ "task": "equivariant-lift", "bound": "1/2" }]);
    let file = temp_file("bound.json", &doc.to_string());
    let (code, report) = run(&["run", path_str(&file)]);
    assert_eq!(code, 5);
    assert_eq!(report["tasks"][0]["checks"]["feasible"], false);
}

#[test]
fn output_file_and_report_command() {
    let path = scenario("square-rotation.json");
    let out = std::env::temp_dir().join(format!("lipfree-cli-{}-report.json", std::process::id()));
    let res = lipfree(&["--output", path_str(&out), "average", path_str(&path)]);
    assert_eq!(res.status.code(), Some(0));
    let summary = String::from_utf8(res.stdout).unwrap();
    assert!(summary.contains("average PASS"), "{summary}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["tasks"].as_array().unwrap().len(), 1);
    let again = lipfree(&["report", path_str(&out)]);
    assert_eq!(again.status.code(), Some(0));
    assert!(String::from_utf8(again.stdout).unwrap().contains("average PASS"));
}

#[test]
fn commands_fall_back_to_default_tasks() {
    let path = scenario("plane-linf-diagonals.json");
    let (code, report) = run(&["free-norm", path_str(&path)]);
    assert_eq!(code, 0);
    assert_eq!(report["tasks"][0]["checks"]["molecules_isometric"], true);
    let (code, _) = run(&["lift", path_str(&path)]);
    assert_eq!(code, 0);
    // Averaging needs a group.
    assert_eq!(run(&["average", path_str(&path)]).0, 3);
    // Cube liftings have no defaults.
    assert_eq!(run(&["cube-lift", path_str(&path)]).0, 3);
}
