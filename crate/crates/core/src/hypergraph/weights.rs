//! Raw hyperedge weights for the three relationship kinds.

use std::collections::HashMap;

use crate::corpus::{PullRequest, Timestamp};
use crate::params::SimilarityUnit;

/// Elapsed time as a fraction of the dataset span. A zero-length span
/// yields 0 so that every recency factor collapses to `exp(0) = 1`.
fn span_fraction(delta: Timestamp, t_s: Timestamp, t_e: Timestamp) -> f64 {
    let span = t_e - t_s;
    if span <= 0 {
        0.0
    } else {
        delta as f64 / span as f64
    }
}

/// Combined weight of all reviewers of one PR.
///
/// Each reviewer's comments on the PR are taken in time order; the `j`-th
/// (from 0) contributes `lambda^j * exp((t - t_e) / (t_e - t_s))`.
pub fn weight_pr_reviewer<'a>(
    pr: &PullRequest,
    reviewers: impl IntoIterator<Item = &'a str>,
    lambda: f64,
    t_s: Timestamp,
    t_e: Timestamp,
) -> f64 {
    reviewers
        .into_iter()
        .map(|r| {
            let mut decay = 1.0;
            let mut total = 0.0;
            for t in pr.comment_times(r) {
                total += decay * span_fraction(t - t_e, t_s, t_e).exp();
                decay *= lambda;
            }
            total
        })
        .fold(0.0, |a, b| a + b)
}

/// Position of the PR's creation time within `[t_s, t_e]`.
pub fn weight_pr_contributor(created_at: Timestamp, t_s: Timestamp, t_e: Timestamp) -> f64 {
    if t_e <= t_s {
        log::warn!("dataset spans a single instant; PR-contributor weight defaults to 1");
        return 1.0;
    }
    span_fraction(created_at - t_s, t_s, t_e)
}

/// Splits a path into comparable tokens for the given unit.
pub fn path_tokens(path: &str, unit: SimilarityUnit) -> Vec<&str> {
    match unit {
        SimilarityUnit::Components => path.split('/').filter(|c| !c.is_empty()).collect(),
        SimilarityUnit::Chars => path
            .char_indices()
            .map(|(i, c)| &path[i..i + c.len_utf8()])
            .collect(),
    }
}

fn prefix_ratio<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    common as f64 / longest as f64
}

/// Length of the common leading prefix over the longer path's length.
pub fn path_similarity(a: &str, b: &str, unit: SimilarityUnit) -> f64 {
    prefix_ratio(&path_tokens(a, unit), &path_tokens(b, unit))
}

/// Recency-damped mean pairwise path similarity of two PRs.
pub fn weight_pr_pr(
    a: &PullRequest,
    b: &PullRequest,
    t_s: Timestamp,
    t_e: Timestamp,
    unit: SimilarityUnit,
) -> f64 {
    let mut interner = TokenInterner::default();
    let fa = interner.file_set(&a.file_paths, unit);
    let fb = interner.file_set(&b.file_paths, unit);
    pr_pr_from_tokens(&fa, a.created_at, &fb, b.created_at, t_s, t_e)
}

/// A PR's file set with every path turned into interned token ids.
pub(crate) type TokenizedFiles = Vec<Vec<u32>>;

#[derive(Default)]
pub(crate) struct TokenInterner {
    ids: HashMap<String, u32>,
}

impl TokenInterner {
    pub(crate) fn file_set(&mut self, files: &[String], unit: SimilarityUnit) -> TokenizedFiles {
        files
            .iter()
            .map(|f| {
                path_tokens(f, unit)
                    .into_iter()
                    .map(|tok| {
                        let next = self.ids.len() as u32;
                        *self.ids.entry(tok.to_string()).or_insert(next)
                    })
                    .collect()
            })
            .collect()
    }

    /// Like [`file_set`](Self::file_set) without growing the table. Unknown
    /// tokens map to a sentinel that never equals an interned id.
    pub(crate) fn lookup_set(&self, files: &[String], unit: SimilarityUnit) -> TokenizedFiles {
        files
            .iter()
            .map(|f| {
                path_tokens(f, unit)
                    .into_iter()
                    .map(|tok| self.ids.get(tok).copied().unwrap_or(u32::MAX))
                    .collect()
            })
            .collect()
    }
}

pub(crate) fn pr_pr_from_tokens(
    fa: &TokenizedFiles,
    ta: Timestamp,
    fb: &TokenizedFiles,
    tb: Timestamp,
    t_s: Timestamp,
    t_e: Timestamp,
) -> f64 {
    if fa.is_empty() || fb.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for x in fa {
        for y in fb {
            sum += prefix_ratio(x, y);
        }
    }
    let mean = sum / (fa.len() * fb.len()) as f64;
    mean * (-span_fraction((ta - tb).abs(), t_s, t_e)).exp()
}
