use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub group_a: String,
    pub group_b: String,
    /// `mean(b) − mean(a)` (mean ranks for Nemenyi).
    #[serde(with = "crate::floats")]
    pub mean_diff: f64,
    #[serde(with = "crate::floats")]
    pub ci_low: f64,
    #[serde(with = "crate::floats")]
    pub ci_high: f64,
    #[serde(with = "crate::floats")]
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: String,
    #[serde(with = "crate::floats")]
    pub statistic: f64,
    /// Degrees of freedom, e.g. `[2, 33]` for F; empty when not applicable.
    #[serde(with = "crate::floats::vec")]
    pub df: Vec<f64>,
    #[serde(with = "crate::floats")]
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::floats::option")]
    pub effect_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise: Option<Vec<PairwiseComparison>>,
    /// Test-specific extras (sample sizes, dropped zeros, critical values).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "crate::floats::map")]
    pub details: BTreeMap<String, f64>,
}

impl StatTestResult {
    pub(crate) fn new(test: &str, statistic: f64, df: Vec<f64>, p_value: f64) -> Self {
        Self {
            test: test.to_string(),
            statistic,
            df,
            p_value: p_value.clamp(0.0, 1.0),
            effect_size: None,
            pairwise: None,
            details: BTreeMap::new(),
        }
    }

    pub(crate) fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Pairwise entry for the named pair in either order.
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairwiseComparison> {
        self.pairwise.as_ref()?.iter().find(|p| {
            (p.group_a == a && p.group_b == b) || (p.group_a == b && p.group_b == a)
        })
    }
}
