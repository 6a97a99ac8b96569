//! Machine-readable reports: pretty JSON or flattened `key,value` CSV.

use std::collections::BTreeMap;

use realgit::linalg::CMat;
use realgit::ModelPoint;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::scenario::{Command, EffectiveParams, Scalar, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: Command,
    pub scenario: Scenario,
    pub params: EffectiveParams,
    pub result: Value,
    pub residuals: BTreeMap<String, f64>,
    /// Always `null`: reports are byte-identical across runs.
    pub timing: Option<f64>,
}

impl Report {
    pub fn new(scenario: &Scenario, params: EffectiveParams, result: Value, residuals: BTreeMap<String, f64>) -> Self {
        Self { version: VERSION, command: scenario.command, scenario: scenario.clone(), params, result, residuals, timing: None }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            ReportFormat::Csv => {
                let value = serde_json::to_value(self).expect("reports serialize");
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                let mut s = String::from("key,value\n");
                for (k, v) in rows {
                    s.push_str(&csv_field(&k));
                    s.push(',');
                    s.push_str(&csv_field(&v));
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn matrix_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::to_value(Scalar::from_complex(m[(i, j)])).unwrap()).collect()))
            .collect(),
    )
}

/// Unit representatives for projective factors, raw vectors otherwise.
pub fn point_json(x: &ModelPoint) -> Value {
    Value::Array(
        x.reps
            .iter()
            .map(|v| Value::Array(v.iter().map(|z| serde_json::to_value(Scalar::from_complex(*z)).unwrap()).collect()))
            .collect(),
    )
}

/// Finite numbers as numbers, anything else as a string (`"+inf"`, `"nan"`).
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v == f64::INFINITY {
        Value::from("+inf")
    } else if v == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from("nan")
    }
}

pub fn object(entries: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<String, Value>>())
}
