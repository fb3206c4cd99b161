//! Field-wise comparison of reports.

use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::report::Report;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffEntry {
    pub path: String,
    pub a: Value,
    pub b: Value,
    /// `|a − b|` for numeric fields.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffError {
    SchemaMismatch { path: String, reason: String },
}

impl fmt::Display for DiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffError::SchemaMismatch { path, reason } => write!(f, "schema mismatch at `{path}`: {reason}"),
        }
    }
}

impl std::error::Error for DiffError {}

/// Compares verdicts, results and witnesses. Numbers differing by more than
/// `tol` and any other differing leaves are reported; differing structure
/// is an error.
pub fn report_diff(a: &Report, b: &Report, tol: f64) -> Result<Vec<DiffEntry>, DiffError> {
    if a.command != b.command {
        return Err(DiffError::SchemaMismatch { path: "command".into(), reason: format!("`{}` vs `{}`", a.command, b.command) });
    }
    let mut out = Vec::new();
    if a.verdict != b.verdict {
        out.push(DiffEntry {
            path: "verdict".into(),
            a: serde_json::to_value(a.verdict).unwrap(),
            b: serde_json::to_value(b.verdict).unwrap(),
            delta: None,
        });
    }
    value_diff(&a.results, &b.results, tol, "results", &mut out)?;
    value_diff(&a.witnesses, &b.witnesses, tol, "witnesses", &mut out)?;
    Ok(out)
}

pub fn value_diff(a: &Value, b: &Value, tol: f64, path: &str, out: &mut Vec<DiffEntry>) -> Result<(), DiffError> {
    let mismatch = |reason: String| DiffError::SchemaMismatch { path: path.to_string(), reason };
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            if let Some(k) = x.keys().find(|k| !y.contains_key(*k)).or_else(|| y.keys().find(|k| !x.contains_key(*k))) {
                return Err(mismatch(format!("key `{k}` present on one side only")));
            }
            for (k, v) in x {
                value_diff(v, &y[k], tol, &format!("{path}.{k}"), out)?;
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(mismatch(format!("array lengths {} and {}", x.len(), y.len())));
            }
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                value_diff(v, w, tol, &format!("{path}.{i}"), out)?;
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let d = match (x.as_i64(), y.as_i64()) {
                (Some(p), Some(q)) => (p as i128 - q as i128).unsigned_abs() as f64,
                _ => (x.as_f64().unwrap_or(f64::NAN) - y.as_f64().unwrap_or(f64::NAN)).abs(),
            };
            if d.is_nan() || d > tol {
                out.push(DiffEntry { path: path.to_string(), a: a.clone(), b: b.clone(), delta: Some(d) });
            }
        }
        (Value::Object(_) | Value::Array(_), _) | (_, Value::Object(_) | Value::Array(_)) => {
            return Err(mismatch("object/array against a scalar".into()));
        }
        _ => {
            if a != b {
                out.push(DiffEntry { path: path.to_string(), a: a.clone(), b: b.clone(), delta: None });
            }
        }
    }
    Ok(())
}
