//! Machine-readable run reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub residual: f64,
    /// `None` for exact symbolic comparisons.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Exact comparison of two printed values; the residual is 0 or 1.
    pub fn exact(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (e, a) = (expected.to_string(), actual.to_string());
        let pass = e == a;
        Check {
            name: name.into(),
            expected: Value::String(e),
            actual: Value::String(a),
            residual: if pass { 0.0 } else { 1.0 },
            tolerance: None,
            pass,
        }
    }

    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let residual = (expected - actual).abs();
        Check::with_residual(name, expected, actual, residual, tolerance)
    }

    /// A residual that must be at most `tolerance`.
    pub fn small(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check::with_residual(name, 0.0, residual, residual, tolerance)
    }

    /// A value that must lie in `[lo, hi]`; the residual is the distance to the
    /// interval.
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        let residual = (lo - value).max(value - hi).max(0.0);
        Check {
            name: name.into(),
            expected: serde_json::json!([lo, hi]),
            actual: number(value),
            residual,
            tolerance: Some(0.0),
            pass: residual == 0.0,
        }
    }

    pub fn with_residual(name: impl Into<String>, expected: f64, actual: f64, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            expected: number(expected),
            actual: number(actual),
            residual,
            tolerance: Some(tolerance),
            pass: residual <= tolerance,
        }
    }

    pub fn truth(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            expected: Value::Bool(true),
            actual: Value::Bool(ok),
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: None,
            pass: ok,
        }
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub subcommand: String,
    pub parameters: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub timing: f64,
    /// Computed outputs that are not checks, e.g. expansions or spectra.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub artifacts: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(subcommand: &str) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            timing: 0.0,
            artifacts: BTreeMap::new(),
        }
    }

    pub fn parameter(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn artifact(&mut self, key: &str, value: impl Serialize) {
        self.artifacts.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let mut r = RunReport::new("demo").parameter("seed", 7u64).parameter("b", [0.1, 0.2, 1.0 / 3.0]);
        r.checks.push(Check::exact("identity", "0", "0"));
        r.checks.push(Check::close("bracket", 1.0, 1.0 + 3e-13, 1e-9));
        r.checks.push(Check::within("ratio", 1.9987654321, 1.7, 2.3));
        r.timing = 0.123456789;
        r.artifact("raw", "i*q");
        assert!(r.passed());
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn failures_are_listed() {
        let mut r = RunReport::new("demo");
        r.checks.push(Check::small("tiny", 1e-3, 1e-9));
        r.checks.push(Check::exact("poly", "0", "q"));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 2);
        assert!(!Check::within("low", 1.0, 1.7, 2.3).pass);
    }
}
