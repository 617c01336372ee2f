//! Top-k accuracy, mean reciprocal rank and recommendation distribution.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluated target: who actually reviewed it and what was recommended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub target: String,
    pub truth: BTreeSet<String>,
    /// Recommended developers, best first.
    pub ranked: Vec<String>,
}

impl EvalRecord {
    fn top(&self, k: usize) -> &[String] {
        &self.ranked[..k.min(self.ranked.len())]
    }

    /// 1-based rank of the first true reviewer within the top `k`.
    fn first_hit(&self, k: usize) -> Option<usize> {
        self.top(k).iter().position(|d| self.truth.contains(d)).map(|p| p + 1)
    }
}

fn non_empty(records: &[EvalRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::EmptyRecords)
    } else {
        Ok(())
    }
}

/// Fraction of targets with at least one true reviewer in the top `k`.
pub fn acc(records: &[EvalRecord], k: usize) -> Result<f64> {
    non_empty(records)?;
    let hits = records.iter().filter(|r| r.first_hit(k).is_some()).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Mean of `1 / rank` of the first true reviewer in the top `k` (0 if none).
pub fn mrr(records: &[EvalRecord], k: usize) -> Result<f64> {
    non_empty(records)?;
    let total: f64 = records
        .iter()
        .filter_map(|r| r.first_hit(k))
        .map(|rank| 1.0 / rank as f64)
        .fold(0.0, |a, b| a + b);
    Ok(total / records.len() as f64)
}

/// Normalized entropy of how the top-`k` slots spread over reviewers, with
/// `n_reviewers` the population size. 1 means uniform, 0 a single reviewer.
/// No recommended slots at all also yields 0.
pub fn rd(records: &[EvalRecord], k: usize, n_reviewers: usize) -> Result<f64> {
    non_empty(records)?;
    if n_reviewers < 2 {
        return Err(Error::InvalidParameter(format!(
            "RD needs at least 2 reviewers, got {n_reviewers}"
        )));
    }
    let mut slots: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for d in r.top(k) {
            *slots.entry(d.as_str()).or_default() += 1;
        }
    }
    let total: usize = slots.values().sum();
    if total == 0 {
        return Ok(0.0);
    }
    let entropy: f64 = slots
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .fold(0.0, |a, b| a + b);
    Ok(entropy / (n_reviewers as f64).log2())
}

/// Number of distinct developers recommended in the top `k`.
pub fn distinct_recommended(records: &[EvalRecord], k: usize) -> usize {
    records
        .iter()
        .flat_map(|r| r.top(k))
        .collect::<BTreeSet<_>>()
        .len()
}
