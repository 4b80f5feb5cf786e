use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Outcome of one acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    /// Acceptance criterion number (1–10).
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: String,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    pub fn new(
        criterion: u8,
        name: &str,
        passed: bool,
        measured: f64,
        expected: impl Into<String>,
    ) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed,
            measured,
            expected: expected.into(),
            detail: String::new(),
        }
    }

    /// `measured ≤ bound`
    pub fn at_most(criterion: u8, name: &str, measured: f64, bound: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed: measured <= bound,
            measured,
            expected: format!("<= {:e}", bound),
            detail: String::new(),
        }
    }

    /// `measured ≥ bound`
    pub fn at_least(criterion: u8, name: &str, measured: f64, bound: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed: measured >= bound,
            measured,
            expected: format!(">= {:e}", bound),
            detail: String::new(),
        }
    }

    pub fn flag(criterion: u8, name: &str, passed: bool, expected: &str) -> Self {
        Self {
            criterion,
            name: name.into(),
            passed,
            measured: if passed { 1.0 } else { 0.0 },
            expected: expected.into(),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} [criterion {}] {}: measured {:e}, expected {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.measured,
            self.expected
        );
        if !self.detail.is_empty() {
            s.push_str(" (");
            s.push_str(&self.detail);
            s.push(')');
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Runtime {
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub input_hash: String,
    pub config: ExperimentConfig,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, Value>,
    pub trace_rows: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime: Runtime,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdicts_for(&self, criterion: u8) -> impl Iterator<Item = &Verdict> {
        self.verdicts
            .iter()
            .filter(move |v| v.criterion == criterion)
    }

    pub fn metric_f64(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

/// `sha256:` of the git blob framing `blob <len>\0<canonical config JSON>`.
pub fn input_hash(cfg: &ExperimentConfig) -> String {
    let body = serde_json::to_vec(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(&body);
    format!("sha256:{}", hex::encode(h.finalize()))
}
