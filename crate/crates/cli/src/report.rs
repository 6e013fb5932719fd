use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|computed - expected| <= tolerance`
    Approx,
    /// `computed >= expected - tolerance`
    AtLeast,
    /// `computed <= expected + tolerance`
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub expected: Option<f64>,
    /// `None` when the computed quantity is infinite or undefined.
    pub computed: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, expected: f64, computed: f64, tolerance: f64) -> Self {
        let pass = computed.is_finite()
            && match relation {
                Relation::Approx => (computed - expected).abs() <= tolerance,
                Relation::AtLeast => computed >= expected - tolerance,
                Relation::AtMost => computed <= expected + tolerance,
            };
        Self {
            name: name.into(),
            relation,
            expected: expected.is_finite().then_some(expected),
            computed: computed.is_finite().then_some(computed),
            tolerance,
            pass,
        }
    }

    pub fn approx(name: impl Into<String>, expected: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(name, Relation::Approx, expected, computed, tolerance)
    }

    /// Approximate equality with a tolerance relative to `expected`.
    pub fn relative(name: impl Into<String>, expected: f64, computed: f64, rel: f64) -> Self {
        Self::approx(name, expected, computed, rel * expected.abs())
    }

    pub fn at_least(name: impl Into<String>, bound: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(name, Relation::AtLeast, bound, computed, tolerance)
    }

    pub fn at_most(name: impl Into<String>, bound: f64, computed: f64, tolerance: f64) -> Self {
        Self::new(name, Relation::AtMost, bound, computed, tolerance)
    }

    /// Exact count check, `computed == expected`.
    pub fn count(name: impl Into<String>, expected: usize, computed: usize) -> Self {
        Self::approx(name, expected as f64, computed as f64, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, results: impl Serialize, checks: Vec<Check>) -> Result<Self> {
        let passed = checks.iter().all(|c| c.pass);
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            results: serde_json::to_value(results)?,
            checks,
            passed,
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One `path,value` row per leaf of the JSON form.
    pub fn to_csv(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut rows = Vec::new();
        flatten(&value, String::new(), &mut rows);
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["path", "value"])?;
        for (path, v) in rows {
            w.write_record([path, v])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to `out`, or to stdout when `out` is `None`.
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }
}

pub fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(x, format!("{path}[{i}]"), out);
            }
        }
        Value::String(s) => out.push((path, s.clone())),
        Value::Null => out.push((path, String::new())),
        other => out.push((path, other.to_string())),
    }
}
