//! Reviewer recommendation for an incoming pull request.
//!
//! The target PR is grafted onto the base hypergraph (a PR vertex, its
//! contributor, a PR-contributor edge and its strongest PR-PR edges), the
//! ranking is seeded at the target and its contributor, and developers are
//! returned in descending score order.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{PullRequest, ReviewCorpus, Timestamp};
use crate::error::{Error, Result};
use crate::hypergraph::{
    build, candidate_order, min_max, pr_pr_from_tokens, weight_pr_contributor, EdgeKind, Hyperedge,
    Hypergraph, TokenInterner, TokenizedFiles, VertexKind,
};
use crate::params::HyperParams;
use crate::ranker::{assemble, solve, QueryVector};

/// A pull request awaiting reviewers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetPr {
    pub id: String,
    pub contributor: String,
    pub created_at: Timestamp,
    pub file_paths: Vec<String>,
}

impl From<&PullRequest> for TargetPr {
    fn from(pr: &PullRequest) -> Self {
        TargetPr {
            id: pr.id.clone(),
            contributor: pr.contributor.clone(),
            created_at: pr.created_at,
            file_paths: pr.file_paths.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub developer: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub target: String,
    pub k: usize,
    pub candidates: Vec<Candidate>,
    /// Fewer than `k` developers had a positive score.
    pub short_list: bool,
}

impl Recommendation {
    pub fn developers(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.developer.as_str())
    }
}

/// Scores are snapped to this grid so that symmetric positions, which can
/// differ in the last bits after floating-point summation, tie exactly.
const SCORE_QUANTUM: f64 = 1e-12;

/// Turns raw developer scores into a ranked, truncated recommendation.
///
/// Drops the target's contributor, bots and non-positive scores. Ties are
/// broken by historical review-comment count (higher first), then id.
pub(crate) fn rank_candidates<'a>(
    target: &TargetPr,
    scores: impl IntoIterator<Item = (&'a str, f64)>,
    corpus: &ReviewCorpus,
    comment_counts: &HashMap<&str, usize>,
    k: usize,
) -> Result<Recommendation> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut ranked: Vec<(&str, f64)> = scores
        .into_iter()
        .filter(|(dev, _)| *dev != target.contributor && !corpus.is_bot(dev))
        .map(|(dev, s)| (dev, (s / SCORE_QUANTUM).round() * SCORE_QUANTUM))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    let count = |d: &str| comment_counts.get(d).copied().unwrap_or(0);
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| count(b.0).cmp(&count(a.0)))
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.truncate(k);
    Ok(Recommendation {
        target: target.id.clone(),
        k,
        short_list: ranked.len() < k,
        candidates: ranked
            .into_iter()
            .map(|(d, s)| Candidate {
                developer: d.to_string(),
                score: s,
            })
            .collect(),
    })
}

fn graft_with(
    base: &Hypergraph,
    prs: &[PullRequest],
    files: &[TokenizedFiles],
    target: &TargetPr,
    target_files: &TokenizedFiles,
    params: &HyperParams,
) -> Result<Hypergraph> {
    if target.file_paths.is_empty() {
        return Err(Error::EmptyTarget(target.id.clone()));
    }
    if base.vertex_index(VertexKind::Pr, &target.id).is_some() {
        return Err(Error::TargetExists(target.id.clone()));
    }
    let (t_s, t_e) = base.bounds();
    let t_e = t_e.max(target.created_at);

    let mut cands: Vec<(usize, f64)> = prs
        .iter()
        .zip(files)
        .enumerate()
        .filter_map(|(i, (pr, f))| {
            let w = pr_pr_from_tokens(target_files, target.created_at, f, pr.created_at, t_s, t_e);
            (w > 0.0).then_some((i, w))
        })
        .collect();
    cands.sort_by(|a, b| {
        candidate_order(
            (a.1, prs[a.0].created_at, &prs[a.0].id),
            (b.1, prs[b.0].created_at, &prs[b.0].id),
        )
    });
    cands.truncate(params.m);

    let contributor_range = base.raw_range(EdgeKind::PrContributor);
    let pr_pr_range = base.raw_range(EdgeKind::PrPr);
    let normalized = |raw: f64, range: Option<(f64, f64)>| match range {
        Some((lo, hi)) => min_max(raw, lo, hi),
        None => 1.0,
    };

    let mut g = base.clone();
    g.set_t_e(t_e);
    let pv = g.add_vertex(VertexKind::Pr, &target.id);
    let cv = g.add_vertex(VertexKind::Developer, &target.contributor);
    let raw = weight_pr_contributor(target.created_at, t_s, t_e);
    g.push_edge(Hyperedge {
        kind: EdgeKind::PrContributor,
        members: vec![pv, cv],
        raw_weight: raw,
        weight: normalized(raw, contributor_range),
    });
    for (i, raw) in cands {
        let other = base
            .vertex_index(VertexKind::Pr, &prs[i].id)
            .ok_or_else(|| Error::InvalidParameter(format!("PR `{}` is not in the base graph", prs[i].id)))?;
        g.push_edge(Hyperedge {
            kind: EdgeKind::PrPr,
            members: vec![pv, other],
            raw_weight: raw,
            weight: normalized(raw, pr_pr_range),
        });
    }
    Ok(g)
}

/// Adds the target PR to a copy of `base`.
///
/// New edge weights are min-max scaled with the base graph's per-kind raw
/// range (clamped to [0, 1]) so they are comparable to existing edges.
pub fn graft(base: &Hypergraph, corpus: &ReviewCorpus, target: &TargetPr, params: &HyperParams) -> Result<Hypergraph> {
    params.validate()?;
    let mut interner = TokenInterner::default();
    let files: Vec<TokenizedFiles> = corpus
        .prs()
        .iter()
        .map(|p| interner.file_set(&p.file_paths, params.similarity_unit))
        .collect();
    let target_files = interner.file_set(&target.file_paths, params.similarity_unit);
    graft_with(base, corpus.prs(), &files, target, &target_files, params)
}

/// Indicator of the target PR vertex and its contributor's vertex.
pub fn query_vector(graph: &Hypergraph, target: &TargetPr) -> Result<QueryVector> {
    let missing = || Error::InvalidParameter(format!("target `{}` has not been grafted", target.id));
    let pv = graph.vertex_index(VertexKind::Pr, &target.id).ok_or_else(missing)?;
    let cv = graph
        .vertex_index(VertexKind::Developer, &target.contributor)
        .ok_or_else(missing)?;
    QueryVector::indicator(graph.vertices().len(), &[pv, cv])
}

fn rank_grafted(
    grafted: &Hypergraph,
    corpus: &ReviewCorpus,
    counts: &HashMap<&str, usize>,
    target: &TargetPr,
    params: &HyperParams,
    k: usize,
) -> Result<Recommendation> {
    let y = query_vector(grafted, target)?;
    let sys = assemble(grafted, params.alpha)?;
    let f = solve(&sys, &y, params)?;
    let scores = grafted
        .vertices()
        .iter()
        .filter(|v| v.kind == VertexKind::Developer)
        .map(|v| (v.id.as_str(), f.scores[v.index]));
    rank_candidates(target, scores, corpus, counts, k)
}

/// One-shot recommendation against a prebuilt base graph.
pub fn recommend(
    base: &Hypergraph,
    corpus: &ReviewCorpus,
    target: &TargetPr,
    params: &HyperParams,
    k: usize,
) -> Result<Recommendation> {
    let grafted = graft(base, corpus, target, params)?;
    rank_grafted(&grafted, corpus, &corpus.review_comment_counts(), target, params, k)
}

/// A base graph with the per-corpus data needed to serve many targets.
pub struct Recommender {
    corpus: Arc<ReviewCorpus>,
    params: HyperParams,
    base: Hypergraph,
    interner: TokenInterner,
    files: Vec<TokenizedFiles>,
}

impl Recommender {
    pub fn new(corpus: Arc<ReviewCorpus>, params: HyperParams) -> Result<Self> {
        let base = build(&corpus, &params)?;
        let mut interner = TokenInterner::default();
        let files = corpus
            .prs()
            .iter()
            .map(|p| interner.file_set(&p.file_paths, params.similarity_unit))
            .collect();
        Ok(Recommender {
            corpus,
            params,
            base,
            interner,
            files,
        })
    }

    pub fn base(&self) -> &Hypergraph {
        &self.base
    }

    pub fn corpus(&self) -> &ReviewCorpus {
        &self.corpus
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn graft(&self, target: &TargetPr) -> Result<Hypergraph> {
        let target_files = self.interner.lookup_set(&target.file_paths, self.params.similarity_unit);
        graft_with(&self.base, self.corpus.prs(), &self.files, target, &target_files, &self.params)
    }

    pub fn recommend(&self, target: &TargetPr, k: usize) -> Result<Recommendation> {
        let grafted = self.graft(target)?;
        let counts = self.corpus.review_comment_counts();
        rank_grafted(&grafted, &self.corpus, &counts, target, &self.params, k)
    }

    /// Recommendations for many targets, computed in parallel, in input order.
    pub fn recommend_all(&self, targets: &[TargetPr], k: usize) -> Result<Vec<Recommendation>> {
        use rayon::prelude::*;
        let counts = self.corpus.review_comment_counts();
        targets
            .par_iter()
            .map(|t| {
                let target_files = self.interner.lookup_set(&t.file_paths, self.params.similarity_unit);
                let g = graft_with(&self.base, self.corpus.prs(), &self.files, t, &target_files, &self.params)?;
                rank_grafted(&g, &self.corpus, &counts, t, &self.params, k)
            })
            .collect()
    }
}
