//! Report assembly and canonical JSON output (17 significant digits).

use cmctime_core::grid::fmt17;
use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::scenario::Scenario;

pub const VERSION: &str = concat!("cmctime ", env!("CARGO_PKG_VERSION"));

/// Rewrites every float with 17 significant digits (`d.dddddddddddddddde±x`).
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(x) => serde_json::from_str::<Number>(&fmt17(x)).map_or(Value::Null, Value::Number),
            None => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

/// Echo of the validated scenario; planes as normalized on load.
pub fn scenario_echo(s: &Scenario) -> Value {
    let planes: Vec<Value> = s
        .domain
        .planes()
        .iter()
        .map(|p| json!({ "u": p.u_hat, "a": p.a }))
        .collect();
    json!({
        "dimension": s.dimension,
        "planes": planes,
        "grid": s.grid,
        "seed": s.seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub name: String,
    pub exit_code: i32,
    pub summary: Value,
}

impl TaskResult {
    pub fn pass(&self) -> bool {
        self.exit_code == 0
    }
}

pub fn assemble(command: &str, scenario: &Scenario, tasks: &[TaskResult]) -> (Value, i32) {
    let exit_code = tasks.iter().map(|t| t.exit_code).max().unwrap_or(0);
    let entries: Vec<Value> = tasks
        .iter()
        .map(|t| {
            let mut m = Map::new();
            m.insert("task".into(), Value::String(t.name.clone()));
            m.insert("pass".into(), Value::Bool(t.pass()));
            m.insert("exit_code".into(), json!(t.exit_code));
            m.insert("summary".into(), t.summary.clone());
            Value::Object(m)
        })
        .collect();
    let report = json!({
        "version": VERSION,
        "command": command,
        "scenario": scenario_echo(scenario),
        "tasks": entries,
        "pass": exit_code == 0,
        "exit_code": exit_code,
    });
    (canonical(report), exit_code)
}
