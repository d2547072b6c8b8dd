use std::fmt::Write as _;

use plap_core::grid::fmt_f64;
use serde_json::{Map, Value};

/// Top-level keys of every result document, in emission order.
pub const RESULT_KEYS: [&str; 7] =
    ["command", "params", "grid", "result", "diagnostics", "warnings", "version"];

/// Top-level keys of an error document.
pub const ERROR_KEYS: [&str; 3] = ["command", "error", "version"];

/// Object with keys in insertion order.
#[derive(Debug, Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn opt(self, key: &str, value: Option<f64>) -> Self {
        self.set(key, value.map(Value::from).unwrap_or(Value::Null))
    }
}

impl From<Obj> for Value {
    fn from(o: Obj) -> Value {
        Value::Object(o.0)
    }
}

/// Pretty JSON with every float written as `{:.16e}`; non-finite floats
/// become `null`.
pub fn to_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn write_value(s: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => s.push_str("null"),
        Value::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => s.push_str(&fmt_f64(x)),
                    _ => s.push_str("null"),
                }
            } else {
                let _ = write!(s, "{n}");
            }
        }
        Value::String(t) => s.push_str(&Value::String(t.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                s.push_str("[]");
                return;
            }
            s.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                newline(s, depth + 1);
                write_value(s, item, depth + 1);
            }
            newline(s, depth);
            s.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                s.push_str("{}");
                return;
            }
            s.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                newline(s, depth + 1);
                s.push_str(&Value::String(k.clone()).to_string());
                s.push_str(": ");
                write_value(s, item, depth + 1);
            }
            newline(s, depth);
            s.push('}');
        }
    }
}

fn newline(s: &mut String, depth: usize) {
    s.push('\n');
    for _ in 0..depth {
        s.push_str("  ");
    }
}

/// Structural check of a result or error document.
pub fn validate_document(v: &Value) -> Result<(), String> {
    let obj = v.as_object().ok_or("document is not an object")?;
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    let command = obj.get("command").and_then(Value::as_str).ok_or("missing command")?;
    if obj.get("version").and_then(Value::as_str).is_none() {
        return Err("missing version".into());
    }
    if keys == ERROR_KEYS {
        let err = obj["error"].as_object().ok_or("error is not an object")?;
        for k in ["kind", "message"] {
            if err.get(k).and_then(Value::as_str).is_none() {
                return Err(format!("error.{k} missing"));
            }
        }
        return Ok(());
    }
    if keys != RESULT_KEYS {
        return Err(format!("unexpected top-level keys {keys:?}"));
    }
    if !obj["params"].is_object() {
        return Err("params is not an object".into());
    }
    if !(obj["grid"].is_object() || obj["grid"].is_null()) {
        return Err("grid must be an object or null".into());
    }
    if !obj["result"].is_object() || !obj["diagnostics"].is_object() {
        return Err("result and diagnostics must be objects".into());
    }
    let warnings = obj["warnings"].as_array().ok_or("warnings is not an array")?;
    if !warnings.iter().all(Value::is_string) {
        return Err("warnings must be strings".into());
    }
    let required: &[&str] = match command {
        "eigen" => &["lambda1"],
        "solve" => &["energy", "converged", "nehari_residual", "stationarity_residual"],
        "window" => &["lambda1", "lambda_lo", "lambda_hi"],
        "pohozaev" => &["feasible"],
        "residual" => &["lhs", "rhs", "residual"],
        "shoot" => &["d", "first_zero"],
        "sweep" => &["rows", "band"],
        "fiber" => &["t", "slope_residual"],
        other => return Err(format!("unknown command {other}")),
    };
    for k in required {
        if !obj["result"].as_object().unwrap().contains_key(*k) {
            return Err(format!("result.{k} missing for {command}"));
        }
    }
    Ok(())
}
