//! Simplified comparison recommenders.
//!
//! These are compact re-readings of well-known reviewer recommenders, not
//! faithful ports. Each is a pure function of the training corpus, the
//! target PR and `k`, and shares the candidate filtering and tie-breaking of
//! [`crate::recommender`].

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::ReviewCorpus;
use crate::error::{Error, Result};
use crate::hypergraph::path_similarity;
use crate::params::SimilarityUnit;
use crate::recommender::{rank_candidates, Recommendation, TargetPr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Recent review activity.
    Ac,
    /// File-path similarity to past PRs.
    RevFinder,
    /// Per-file review share plus recency.
    CHRev,
    /// Comment-network interaction with the contributor.
    Cn,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [BaselineKind::Ac, BaselineKind::RevFinder, BaselineKind::CHRev, BaselineKind::Cn];

    /// Report label; the `-s` suffix marks the simplified variants.
    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Ac => "AC-s",
            BaselineKind::RevFinder => "RevFinder-s",
            BaselineKind::CHRev => "cHRev-s",
            BaselineKind::Cn => "CN-s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub ac_window_days: u32,
    pub cn_decay: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            ac_window_days: 90,
            cn_decay: 0.8,
        }
    }
}

pub fn recommend_baseline(
    kind: BaselineKind,
    corpus: &ReviewCorpus,
    target: &TargetPr,
    k: usize,
    config: &BaselineConfig,
) -> Result<Recommendation> {
    match kind {
        BaselineKind::Ac => ac_recommend(corpus, target, k, config.ac_window_days),
        BaselineKind::RevFinder => revfinder_recommend(corpus, target, k),
        BaselineKind::CHRev => chrev_recommend(corpus, target, k),
        BaselineKind::Cn => cn_recommend(corpus, target, k, config.cn_decay),
    }
}

fn finish(corpus: &ReviewCorpus, target: &TargetPr, scores: BTreeMap<&str, f64>, k: usize) -> Result<Recommendation> {
    rank_candidates(target, scores, corpus, &corpus.review_comment_counts(), k)
}

/// Review comments made during the last `window_days` of the history.
pub fn ac_recommend(corpus: &ReviewCorpus, target: &TargetPr, k: usize, window_days: u32) -> Result<Recommendation> {
    if window_days == 0 {
        return Err(Error::InvalidParameter("AC window must be at least one day".into()));
    }
    let since = corpus.t_e() - i64::from(window_days) * 86_400;
    let mut scores = BTreeMap::new();
    for pr in corpus.prs() {
        for c in &pr.comments {
            if c.author != pr.contributor && c.created_at >= since {
                *scores.entry(c.author.as_str()).or_insert(0.0) += 1.0;
            }
        }
    }
    finish(corpus, target, scores, k)
}

/// Every reviewer of a past PR accrues that PR's mean pairwise path
/// similarity to the target.
pub fn revfinder_recommend(corpus: &ReviewCorpus, target: &TargetPr, k: usize) -> Result<Recommendation> {
    if target.file_paths.is_empty() {
        return Err(Error::EmptyTarget(target.id.clone()));
    }
    let mut scores = BTreeMap::new();
    for pr in corpus.prs() {
        let reviewers = pr.reviewers();
        if reviewers.is_empty() {
            continue;
        }
        let mut total = 0.0;
        for f in &target.file_paths {
            for g in &pr.file_paths {
                total += path_similarity(f, g, SimilarityUnit::Components);
            }
        }
        let s = total / (target.file_paths.len() * pr.file_paths.len()) as f64;
        for r in reviewers {
            *scores.entry(r).or_insert(0.0) += s;
        }
    }
    finish(corpus, target, scores, k)
}

/// For each target file: the reviewer's share of review comments on past
/// PRs touching that file, plus how recent their last such comment is.
pub fn chrev_recommend(corpus: &ReviewCorpus, target: &TargetPr, k: usize) -> Result<Recommendation> {
    if target.file_paths.is_empty() {
        return Err(Error::EmptyTarget(target.id.clone()));
    }
    let span = (corpus.t_e() - corpus.t_s()) as f64;
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for f in &target.file_paths {
        let mut per_reviewer: BTreeMap<&str, (usize, i64)> = BTreeMap::new();
        let mut total = 0usize;
        for pr in corpus.prs().iter().filter(|p| p.file_paths.contains(f)) {
            for c in pr.comments.iter().filter(|c| c.author != pr.contributor) {
                let entry = per_reviewer.entry(c.author.as_str()).or_insert((0, i64::MIN));
                entry.0 += 1;
                entry.1 = entry.1.max(c.created_at);
                total += 1;
            }
        }
        for (r, (count, last)) in per_reviewer {
            let recency = if span > 0.0 {
                (last - corpus.t_s()) as f64 / span
            } else {
                1.0
            };
            *scores.entry(r).or_insert(0.0) += count as f64 / total as f64 + recency;
        }
    }
    finish(corpus, target, scores, k)
}

/// Interaction strength with the target's contributor in the comment
/// network, in both directions.
///
/// The edge `r -> a` collects one term per PR by `a` that `r` commented on;
/// the `j`-th most recent such PR (from 0) adds `decay^j`.
pub fn cn_recommend(corpus: &ReviewCorpus, target: &TargetPr, k: usize, decay: f64) -> Result<Recommendation> {
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::InvalidParameter(format!("CN decay must lie in (0, 1], got {decay}")));
    }
    // (commenter, contributor) -> creation times of the PRs involved
    let mut interactions: HashMap<(&str, &str), Vec<i64>> = HashMap::new();
    for pr in corpus.prs() {
        for r in pr.reviewers() {
            interactions
                .entry((r, pr.contributor.as_str()))
                .or_default()
                .push(pr.created_at);
        }
    }
    let edge_weight = |times: &Vec<i64>| {
        let mut sorted = times.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.iter().enumerate().map(|(j, _)| decay.powi(j as i32)).sum::<f64>()
    };
    let a = target.contributor.as_str();
    let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
    for ((from, to), times) in &interactions {
        if *to == a {
            *scores.entry(from).or_insert(0.0) += edge_weight(times);
        } else if *from == a {
            *scores.entry(to).or_insert(0.0) += edge_weight(times);
        }
    }
    finish(corpus, target, scores, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean, CleanOptions, PrState, PullRequest, ReviewComment};

    const DAY: i64 = 86_400;

    fn pr(id: &str, contributor: &str, t: i64, files: &[&str], comments: &[(&str, i64)]) -> PullRequest {
        PullRequest {
            id: id.into(),
            contributor: contributor.into(),
            created_at: t,
            file_paths: files.iter().map(|s| s.to_string()).collect(),
            comments: comments
                .iter()
                .map(|(a, t)| ReviewComment {
                    author: a.to_string(),
                    created_at: *t,
                })
                .collect(),
            state: PrState::Merged,
        }
    }

    fn corpus(prs: Vec<PullRequest>) -> ReviewCorpus {
        clean(prs, &CleanOptions { min_reviews: 1, ..Default::default() }).unwrap()
    }

    fn target(contributor: &str, files: &[&str]) -> TargetPr {
        TargetPr {
            id: "t".into(),
            contributor: contributor.into(),
            created_at: 1_000 * DAY,
            file_paths: files.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn ids(r: &Recommendation) -> Vec<&str> {
        r.developers().collect()
    }

    #[test]
    fn ac_counts_recent_comments() {
        let t = 500 * DAY;
        let c = corpus(vec![
            pr("1", "a", t, &["x"], &[("b", t), ("b", t), ("b", t), ("b", t), ("b", t), ("c", t), ("c", t)]),
            pr("0", "a", 0, &["x"], &[("z", 0)]),
        ]);
        let r = ac_recommend(&c, &target("a", &["x"]), 3, 90).unwrap();
        assert_eq!(ids(&r), ["b", "c"]);
        assert!(r.short_list);
    }

    #[test]
    fn ac_empty_window() {
        let c = corpus(vec![pr("1", "a", 0, &["x"], &[("b", 0)]), pr("2", "a", 400 * DAY, &["x"], &[])]);
        let r = ac_recommend(&c, &target("a", &["x"]), 1, 90).unwrap();
        assert!(r.candidates.is_empty() && r.short_list);
        assert!(ac_recommend(&c, &target("a", &["x"]), 1, 0).is_err());
    }

    #[test]
    fn ac_ties_use_comment_count_then_id() {
        let c = corpus(vec![
            pr("1", "a", 0, &["x"], &[("d", 0), ("c", 0)]),
            pr("2", "a", 400 * DAY, &["x"], &[("c", 400 * DAY), ("d", 400 * DAY)]),
            pr("3", "a", 400 * DAY, &["x"], &[("e", 400 * DAY), ("e", 10)]),
        ]);
        let r = ac_recommend(&c, &target("a", &["x"]), 3, 90).unwrap();
        // all three have one recent and two historical comments, so id decides
        assert_eq!(ids(&r), ["c", "d", "e"]);
    }

    #[test]
    fn revfinder_prefers_identical_paths() {
        let c = corpus(vec![
            pr("1", "a", 0, &["src/net/tcp.c"], &[("r", 1)]),
            pr("2", "a", 1, &["docs/readme.md"], &[("s", 2)]),
        ]);
        let r = revfinder_recommend(&c, &target("a", &["src/net/tcp.c"]), 2).unwrap();
        assert_eq!(ids(&r), ["r"]);
        assert_eq!(r.candidates[0].score, 1.0);

        let none = revfinder_recommend(&c, &target("a", &["lib/q"]), 2).unwrap();
        assert!(none.candidates.is_empty());
    }

    #[test]
    fn revfinder_symmetric_tie() {
        let c = corpus(vec![
            pr("1", "a", 0, &["src/x"], &[("q", 1)]),
            pr("2", "a", 1, &["src/x"], &[("p", 2)]),
        ]);
        let r = revfinder_recommend(&c, &target("a", &["src/x"]), 2).unwrap();
        assert_eq!(ids(&r), ["p", "q"]);
        assert_eq!(r.candidates[0].score, r.candidates[1].score);
    }

    #[test]
    fn chrev_examples() {
        let c = corpus(vec![
            pr("1", "a", 0, &["src/x"], &[("r", 10)]),
            pr("2", "a", 20, &["src/y"], &[("s", 15), ("s", 30)]),
            pr("3", "a", 40, &["src/y"], &[("u", 50), ("u", 55)]),
        ]);
        let r = chrev_recommend(&c, &target("a", &["src/x"]), 2).unwrap();
        assert_eq!(ids(&r), ["r"]);
        assert!(r.candidates[0].score >= 1.0);

        let unseen = chrev_recommend(&c, &target("a", &["src/never"]), 2).unwrap();
        assert!(unseen.candidates.is_empty() && unseen.short_list);

        // equal share on src/y, u commented last
        let r = chrev_recommend(&c, &target("a", &["src/y"]), 2).unwrap();
        assert_eq!(ids(&r), ["u", "s"]);
    }

    #[test]
    fn cn_examples() {
        let c = corpus(vec![
            pr("1", "a", 0, &["x"], &[("r", 1)]),
            pr("2", "a", 10, &["x"], &[("r", 11)]),
            pr("3", "a", 20, &["x"], &[("r", 21), ("s", 22)]),
            pr("4", "b", 30, &["x"], &[("t", 31)]),
        ]);
        let r = cn_recommend(&c, &target("a", &["x"]), 3, 0.8).unwrap();
        assert_eq!(ids(&r), ["r", "s"]);
        assert!((r.candidates[0].score - (1.0 + 0.8 + 0.64)).abs() < 1e-12);

        let lonely = cn_recommend(&c, &target("newcomer", &["x"]), 3, 0.8).unwrap();
        assert!(lonely.candidates.is_empty());
        assert!(cn_recommend(&c, &target("a", &["x"]), 3, 0.0).is_err());
    }

    #[test]
    fn cn_counts_both_directions() {
        let c = corpus(vec![
            pr("1", "a", 0, &["x"], &[("p", 1)]),
            pr("2", "q", 10, &["x"], &[("a", 11)]),
        ]);
        let r = cn_recommend(&c, &target("a", &["x"]), 3, 0.8).unwrap();
        // p and q symmetric, tie on comment count (p 1, q 0) -> p first
        assert_eq!(ids(&r), ["p", "q"]);
    }

    #[test]
    fn contributor_never_recommended() {
        let c = corpus(vec![
            pr("1", "b", 0, &["x"], &[("a", 1)]),
            pr("2", "b", 10, &["x"], &[("a", 11)]),
        ]);
        for kind in BaselineKind::ALL {
            let r = recommend_baseline(kind, &c, &target("a", &["x"]), 5, &BaselineConfig::default()).unwrap();
            assert!(r.developers().all(|d| d != "a"), "{kind:?}");
        }
    }
}
