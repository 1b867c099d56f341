//! Run records, error records and the number conventions shared by JSON
//! and CSV output.

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// A successful command result: echoed parameters plus flat outputs.
#[derive(Debug, Default)]
pub struct Record {
    pub params: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub seed: u64,
}

impl Record {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Default::default()
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn out(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.outputs.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self, command: &str) -> Value {
        let mut obj = header(command, self.seed);
        obj.insert("params".into(), Value::Object(self.params.clone()));
        for (k, v) in &self.outputs {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl ToString) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn to_json(&self, command: &str, seed: u64) -> Value {
        let mut obj = header(command, seed);
        obj.insert(
            "error".into(),
            json!({ "kind": self.kind, "message": self.message }),
        );
        Value::Object(obj)
    }
}

fn header(command: &str, seed: u64) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), SCHEMA_VERSION.into());
    obj.insert("command".into(), command.into());
    obj.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    obj.insert("seed".into(), seed.into());
    obj
}

/// JSON number with shortest round-trip formatting; non-finite values
/// become the strings `"inf"`, `"-inf"` and `"nan"`.
pub fn num(v: f64) -> Value {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // normalize −0 so that exact zeros print as 0.0
        json!(v + 0.0)
    }
}

/// CSV cell with 12 significant digits.
pub fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) => format!("{f:.11e}"),
            None => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

pub fn csv_number(v: f64) -> String {
    csv_cell(&num(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_are_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(num(-0.0).to_string(), "0.0");
        assert_eq!(num(0.1).to_string(), "0.1");
    }

    #[test]
    fn csv_uses_twelve_significant_digits() {
        assert_eq!(csv_number(0.194064540810796), "1.94064540811e-1");
        assert_eq!(csv_number(-3.0), "-3.00000000000e0");
        assert_eq!(csv_number(f64::INFINITY), "inf");
    }

    #[test]
    fn record_layout() {
        let r = Record::new(7)
            .param("theta", num(-1.0))
            .out("rate", num(0.0));
        let v = r.to_json("rate");
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
        assert_eq!(v["params"]["theta"], json!(-1.0));
        assert_eq!(v["rate"], json!(0.0));
        assert_eq!(v["seed"], json!(7));
    }
}
