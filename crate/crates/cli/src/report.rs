//! Deterministic JSON reports: sorted keys, floats rounded to multiples of 1e-15.

use serde_json::{json, Map, Number, Value};

#[derive(Debug, Default)]
pub struct Report {
    command: String,
    inputs: Map<String, Value>,
    values: Map<String, Value>,
    assertions: Map<String, Value>,
    wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), ..Default::default() }
    }

    pub fn input(&mut self, key: &str, v: impl Into<Value>) {
        self.inputs.insert(key.to_string(), v.into());
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    /// Records an assertion with the quantity it tested.
    pub fn assert(&mut self, key: &str, pass: bool, detail: Value) {
        let mut entry = Map::new();
        entry.insert("pass".into(), Value::Bool(pass));
        if !detail.is_null() {
            entry.insert("detail".into(), detail);
        }
        self.assertions.insert(key.to_string(), Value::Object(entry));
    }

    /// `|got − want| ≤ tol`.
    pub fn assert_close(&mut self, key: &str, got: f64, want: f64, tol: f64) {
        let pass = (got - want).abs() <= tol;
        self.assert(key, pass, json!({ "got": got, "want": want, "tol": tol }));
    }

    /// `got < tol`.
    pub fn assert_below(&mut self, key: &str, got: f64, tol: f64) {
        self.assert(key, got < tol, json!({ "got": got, "tol": tol }));
    }

    pub fn set_wall_time(&mut self, secs: f64) {
        self.wall_time = Some(secs);
    }

    pub fn passed(&self) -> bool {
        self.assertions.values().all(|a| a["pass"] == Value::Bool(true))
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("inputs".into(), Value::Object(self.inputs.clone()));
        root.insert("values".into(), Value::Object(self.values.clone()));
        root.insert("assertions".into(), Value::Object(self.assertions.clone()));
        root.insert("pass".into(), Value::Bool(self.passed()));
        if let Some(t) = self.wall_time {
            root.insert("wall_time_s".into(), json!(t));
        }
        canonical(Value::Object(root))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }
}

fn round_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    let r = (x * 1e15).round() / 1e15;
    // −0 and 0 print differently
    let r = if r == 0.0 { 0.0 } else { r };
    Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
}

/// Rounds every float and rebuilds objects so keys come out sorted.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => {
            let mut entries: Vec<(String, Value)> = o.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect())
        }
        other => other,
    }
}
