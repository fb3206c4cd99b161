//! Report envelope and its JSON and CSV renderings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    /// A computed quantity contradicts a proven inequality.
    Violation,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Violation => 2,
        }
    }

    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Verdict::Pass
        } else {
            Verdict::Violation
        }
    }
}

/// What a command computed. `results` and `witnesses` are deterministic given the config.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub results: Value,
    pub witnesses: Value,
    pub verdict: Verdict,
}

impl Outcome {
    pub fn new(results: Value, verdict: Verdict) -> Self {
        Self { results, witnesses: Value::Array(Vec::new()), verdict }
    }

    pub fn with_witnesses(mut self, witnesses: Value) -> Self {
        self.witnesses = witnesses;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: ExperimentConfig,
    pub tool_version: String,
    pub wall_time_ms: u64,
    pub verdict: Verdict,
    pub results: Value,
    pub witnesses: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are JSON");
        s.push('\n');
        s
    }

    /// The part of the report that must not change between reruns.
    pub fn deterministic_section(&self) -> String {
        serde_json::to_string(&(&self.verdict, &self.results, &self.witnesses)).expect("report values are JSON")
    }

    /// Flattened `section,path,value` rows of the results and witnesses.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "path", "value"])?;
        for (section, v) in [("results", &self.results), ("witnesses", &self.witnesses)] {
            let mut rows = Vec::new();
            flatten(v, String::new(), &mut rows);
            for (path, value) in rows {
                w.write_record([section, &path, &value])?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(x, join(k), out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(x, join(&i.to_string()), out)),
        Value::String(s) => out.push((path, s.clone())),
        other => out.push((path, other.to_string())),
    }
}
