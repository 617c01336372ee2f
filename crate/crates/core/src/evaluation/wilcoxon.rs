//! Wilcoxon signed-rank test for paired samples.
//!
//! Exact null distribution (by dynamic programming over tied ranks) for up
//! to [`EXACT_MAX_N`] non-zero differences, normal approximation with tie
//! and continuity correction above that.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 25;
pub const SIGNIFICANCE: f64 = 0.05;

/// Differences with magnitude at or below this are treated as zero, and
/// magnitudes closer than this share a rank.
const ZERO_TOL: f64 = 1e-12;

/// Outcome of comparing a reference recommender against another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// No significant difference.
    H0,
    /// The reference is significantly better.
    H1a,
    /// The reference is significantly worse.
    H1b,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero differences used.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p_two_sided: f64,
    /// P-value for "x tends to exceed y".
    pub p_greater: f64,
    /// P-value for "x tends to fall below y".
    pub p_less: f64,
    pub exact: bool,
    pub verdict: Verdict,
}

/// Signed ranks of the non-zero differences `x - y`, using average ranks
/// for ties. Returned ranks are doubled so they are always integers.
pub fn doubled_signed_ranks(x: &[f64], y: &[f64]) -> Result<Vec<(u64, bool)>> {
    if x.len() != y.len() {
        return Err(Error::PairedLength(x.len(), y.len()));
    }
    let mut diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| d.abs() > ZERO_TOL)
        .collect();
    diffs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut out = Vec::with_capacity(diffs.len());
    let mut i = 0;
    while i < diffs.len() {
        let mut j = i + 1;
        while j < diffs.len() && (diffs[j].abs() - diffs[i].abs()) <= ZERO_TOL {
            j += 1;
        }
        // ranks i+1 ..= j share (i+1+j)/2, doubled
        let doubled = (i + 1 + j) as u64;
        out.extend(diffs[i..j].iter().map(|d| (doubled, *d > 0.0)));
        i = j;
    }
    Ok(out)
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    let ranks = doubled_signed_ranks(x, y)?;
    let n = ranks.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            p_two_sided: 1.0,
            p_greater: 1.0,
            p_less: 1.0,
            exact: true,
            verdict: Verdict::H0,
        });
    }
    let w2_plus: u64 = ranks.iter().filter(|r| r.1).map(|r| r.0).sum();
    let w2_total: u64 = ranks.iter().map(|r| r.0).sum();
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (w2_total - w2_plus) as f64 / 2.0;

    let exact = n <= EXACT_MAX_N;
    let (p_greater, p_less) = if exact {
        exact_tails(&ranks, w2_plus)
    } else {
        normal_tails(&ranks, w_plus)
    };
    let p_two_sided = (2.0 * p_greater.min(p_less)).min(1.0);
    let verdict = if p_greater < SIGNIFICANCE {
        Verdict::H1a
    } else if p_less < SIGNIFICANCE {
        Verdict::H1b
    } else {
        Verdict::H0
    };
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        p_two_sided,
        p_greater,
        p_less,
        exact,
        verdict,
    })
}

/// `(P(W+ >= observed), P(W+ <= observed))` under the sign-flip null.
fn exact_tails(ranks: &[(u64, bool)], w2_plus: u64) -> (f64, f64) {
    let total: usize = ranks.iter().map(|r| r.0 as usize).sum();
    // counts[s] = number of sign patterns whose doubled W+ equals s
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &(r, _) in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let patterns = 2f64.powi(ranks.len() as i32);
    let obs = w2_plus as usize;
    let upper: f64 = counts[obs..].iter().sum();
    let lower: f64 = counts[..=obs].iter().sum();
    (upper / patterns, lower / patterns)
}

fn normal_tails(ranks: &[(u64, bool)], w_plus: f64) -> (f64, f64) {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < ranks.len() {
        let mut j = i;
        while j < ranks.len() && ranks[j].0 == ranks[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let std = Normal::standard();
    let sd = var.sqrt();
    let p_greater = 1.0 - std.cdf((w_plus - mean - 0.5) / sd);
    let p_less = std.cdf((w_plus - mean + 0.5) / sd);
    (p_greater.clamp(0.0, 1.0), p_less.clamp(0.0, 1.0))
}
