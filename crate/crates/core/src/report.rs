//! Residual reports emitted by the identity suites and convergence studies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::qspecial::{TruncationPolicy, C64};

/// A parameter value recorded in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Complex { re: f64, im: f64 },
    Text(String),
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<C64> for ParamValue {
    fn from(v: C64) -> Self {
        if v.im == 0.0 {
            Self::Real(v.re)
        } else {
            Self::Complex { re: v.re, im: v.im }
        }
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// Truncation settings in force for one report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub max_terms: usize,
    pub tail_tolerance: f64,
    /// Number of product factors, when the check uses a truncated product.
    pub order: Option<usize>,
}

impl TruncationInfo {
    pub fn from_policy(policy: &TruncationPolicy, order: Option<usize>) -> Self {
        Self { max_terms: policy.limit(), tail_tolerance: policy.tail_tolerance, order }
    }
}

/// Outcome of one identity check at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub suite: String,
    pub params: BTreeMap<String, ParamValue>,
    /// Non-finite when the evaluation failed; the failure is recorded in
    /// `params["error"]`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub truncation: TruncationInfo,
    /// Wall time in milliseconds, recorded only when timing is requested.
    pub wall_ms: Option<f64>,
}

impl ResidualReport {
    /// Report with `pass = residual <= tolerance`.
    pub fn new(
        suite: &str,
        params: BTreeMap<String, ParamValue>,
        residual: f64,
        tolerance: f64,
        truncation: TruncationInfo,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            params,
            residual,
            tolerance,
            pass: residual <= tolerance,
            truncation,
            wall_ms: None,
        }
    }
}

/// Builds a parameter map from `(name, value)` pairs.
pub fn params<const N: usize>(entries: [(&str, ParamValue); N]) -> BTreeMap<String, ParamValue> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
