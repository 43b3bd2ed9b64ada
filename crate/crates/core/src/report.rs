//! Structured outcomes of verification checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A named numeric quantity attached to a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Int(i64),
    Real(f64),
}

/// Outcome of a single verification.
///
/// `pass` has three states: `Some(true)` / `Some(false)` for asserted checks
/// and `None` for informational results (a density rank on a noncommutative
/// representation, an inconclusive symbolic residue). Informational results
/// never fail a run.
///
/// Serialized as
/// `{"check", "pass", "metrics", "worst_case", "seed"?, "tolerance", "detail"?}`
/// with metrics and worst-case indices in sorted key order, so reports are
/// byte-stable across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: Option<bool>,
    pub metrics: BTreeMap<String, Metric>,
    pub worst_case: BTreeMap<String, i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerance: f64,
    /// Free-form payload: a verdict string or a symbolic residue, verbatim.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            pass: None,
            metrics: BTreeMap::new(),
            worst_case: BTreeMap::new(),
            seed: None,
            tolerance,
            detail: None,
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn with_metric(mut self, key: impl Into<String>, value: Metric) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }

    pub fn with_real(self, key: impl Into<String>, value: f64) -> Self {
        self.with_metric(key, Metric::Real(value))
    }

    pub fn with_int(self, key: impl Into<String>, value: i64) -> Self {
        self.with_metric(key, Metric::Int(value))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn with_worst(mut self, key: impl Into<String>, index: i64) -> Self {
        self.worst_case.insert(key.into(), index);
        self
    }

    /// True only for an asserted, passing check.
    pub fn passed(&self) -> bool {
        self.pass == Some(true)
    }

    /// True only for an asserted, failing check.
    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }

    pub fn real_metric(&self, key: &str) -> Option<f64> {
        match self.metrics.get(key) {
            Some(Metric::Real(v)) => Some(*v),
            Some(Metric::Int(v)) => Some(*v as f64),
            None => None,
        }
    }

    pub fn int_metric(&self, key: &str) -> Option<i64> {
        match self.metrics.get(key) {
            Some(Metric::Int(v)) => Some(*v),
            _ => None,
        }
    }
}

/// Tracks the largest violation seen together with where it occurred.
#[derive(Debug, Clone, Default)]
pub struct WorstCase {
    value: f64,
    indices: BTreeMap<String, i64>,
}

impl WorstCase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `value` if it strictly exceeds the current worst. Ties keep the
    /// earliest occurrence, which makes reports deterministic under any scan
    /// order that is itself deterministic.
    pub fn observe(&mut self, value: f64, indices: &[(&str, i64)]) {
        if value > self.value {
            self.value = value;
            self.indices = indices.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn apply_to(&self, mut report: CheckReport) -> CheckReport {
        for (k, v) in &self.indices {
            report = report.with_worst(k.clone(), *v);
        }
        report
    }
}
