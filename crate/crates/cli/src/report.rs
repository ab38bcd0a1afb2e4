//! Report documents and their JSON encoding.
//!
//! Exact-mode numbers are written as `"p/q"` strings; float-mode numbers as
//! JSON numbers. Matrices are row-major arrays, free vectors and functions
//! `[label, value]` pairs.

use lipfree::{FreeVector, LinearMap, LipFunction, Matrix, Mode, Scalar, Space};
use serde_json::{json, Map, Value};

pub const FORMAT: &str = "lipfree-report/1";

pub fn num<S: Scalar>(v: &S) -> Value {
    match S::MODE {
        Mode::Exact => Value::String(v.to_string()),
        Mode::Float => serde_json::Number::from_f64(v.to_f64()).map_or(Value::Null, Value::Number),
    }
}

pub fn nums<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(num).collect())
}

pub fn matrix<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(m.to_rows().iter().map(|r| nums(r)).collect())
}

pub fn linear_map<S: Scalar>(t: &LinearMap<S>) -> Value {
    json!({
        "domain": { "kind": t.domain.kind(), "dim": t.domain.dim() },
        "codomain": { "kind": t.codomain.kind(), "dim": t.codomain.dim() },
        "rows": matrix(&t.matrix),
    })
}

pub fn free_vector<S: Scalar>(mu: &FreeVector<S>) -> Value {
    let space = mu.space();
    Value::Array(mu.iter().map(|(p, c)| json!([space.label(p), num(c)])).collect())
}

/// Dense free coordinates as `[label, value]` pairs over the non-base points.
pub fn free_coords<S: Scalar>(space: &Space<S>, coords: &[S]) -> Value {
    Value::Array(
        space.non_base_points().zip(coords).map(|(p, c)| json!([space.label(p), num(c)])).collect(),
    )
}

pub fn lip_function<S: Scalar>(f: &LipFunction<S>) -> Value {
    let space = f.space();
    Value::Array(f.values().iter().enumerate().map(|(p, v)| json!([space.label(p), num(v)])).collect())
}

/// Result of one task.
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub index: usize,
    pub task: String,
    /// Named checks and whether each passed.
    pub checks: Vec<(String, bool)>,
    pub results: Map<String, Value>,
    /// How the numbers were certified.
    pub certification: &'static str,
    /// Set when the task stopped with an error.
    pub error: Option<String>,
    pub exit_code: i32,
}

impl TaskReport {
    pub fn new(index: usize, task: &str) -> Self {
        TaskReport {
            index,
            task: task.to_string(),
            checks: Vec::new(),
            results: Map::new(),
            certification: "exact-recomputation",
            error: None,
            exit_code: 0,
        }
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    pub fn put(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut checks = Map::new();
        for (n, ok) in &self.checks {
            checks.insert(n.clone(), Value::Bool(*ok));
        }
        let mut out = Map::new();
        out.insert("index".into(), json!(self.index));
        out.insert("task".into(), json!(self.task));
        out.insert("pass".into(), json!(self.pass()));
        out.insert("certification".into(), json!(self.certification));
        out.insert("checks".into(), Value::Object(checks));
        out.insert("results".into(), Value::Object(self.results.clone()));
        if let Some(e) = &self.error {
            out.insert("error".into(), json!(e));
        }
        Value::Object(out)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: String,
    pub mode: Mode,
    pub tolerance: Option<f64>,
    pub generated_at: u64,
    pub space: Option<Value>,
    pub tasks: Vec<TaskReport>,
    /// Error raised before any task ran (parsing, validation, capacity).
    pub setup_error: Option<(i32, String, Value)>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if let Some((code, _, _)) = &self.setup_error {
            return *code;
        }
        if let Some(t) = self.tasks.iter().find(|t| t.exit_code != 0 && t.error.is_some()) {
            return t.exit_code;
        }
        if self.tasks.iter().any(|t| !t.pass()) {
            return 5;
        }
        0
    }

    pub fn pass(&self) -> bool {
        self.exit_code() == 0
    }

    pub fn to_json(&self) -> Value {
        let mode = match self.mode {
            Mode::Exact => "exact",
            Mode::Float => "float",
        };
        let tolerance = match (self.mode, self.tolerance) {
            (Mode::Float, Some(t)) => Value::String(format!("{t:e}")),
            _ => Value::Null,
        };
        let mut out = Map::new();
        out.insert("format".into(), json!(FORMAT));
        out.insert("scenario".into(), json!(self.scenario));
        out.insert(
            "environment".into(),
            json!({
                "mode": mode,
                "tolerance": tolerance,
                "versions": {
                    "lipfree-cli": env!("CARGO_PKG_VERSION"),
                },
            }),
        );
        out.insert("generated_at".into(), json!(self.generated_at));
        if let Some(s) = &self.space {
            out.insert("space".into(), s.clone());
        }
        if let Some((code, msg, witness)) = &self.setup_error {
            out.insert("error".into(), json!({ "exit_code": code, "message": msg, "witness": witness }));
        }
        out.insert("tasks".into(), Value::Array(self.tasks.iter().map(TaskReport::to_json).collect()));
        out.insert("pass".into(), json!(self.pass()));
        out.insert("exit_code".into(), json!(self.exit_code()));
        Value::Object(out)
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        summarize(&self.to_json())
    }
}

/// Human-readable summary of a report document.
pub fn summarize(report: &Value) -> String {
    let mut out = String::new();
    let name = report["scenario"].as_str().unwrap_or("?");
    let mode = report["environment"]["mode"].as_str().unwrap_or("?");
    out.push_str(&format!("scenario {name} ({mode} mode)\n"));
    if let Some(err) = report.get("error") {
        out.push_str(&format!("  error: {}\n", err["message"].as_str().unwrap_or("?")));
        if let Some(w) = err.get("witness").filter(|w| !w.is_null()) {
            out.push_str(&format!("  witness: {w}\n"));
        }
    }
    for t in report["tasks"].as_array().into_iter().flatten() {
        let status = if t["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
        out.push_str(&format!("  [{}] {} {}", t["index"], t["task"].as_str().unwrap_or("?"), status));
        if let Some(e) = t.get("error").and_then(Value::as_str) {
            out.push_str(&format!(": {e}"));
        } else if let Some(checks) = t["checks"].as_object() {
            let failed: Vec<&str> =
                checks.iter().filter(|(_, v)| v.as_bool() != Some(true)).map(|(k, _)| k.as_str()).collect();
            if !failed.is_empty() {
                out.push_str(&format!(": failed {}", failed.join(", ")));
            } else {
                let noun = if checks.len() == 1 { "check" } else { "checks" };
                out.push_str(&format!(" ({} {noun})", checks.len()));
            }
        }
        out.push('\n');
    }
    out.push_str(&format!("exit code {}\n", report["exit_code"]));
    out
}
