//! Weighted hypergraph over PRs and developers.
//!
//! Three hyperedge kinds connect the vertices: a PR with its contributor, a
//! PR with all of its reviewers, and pairs of PRs with similar file paths.
//! Weights are computed raw and then min-max normalized per kind.

mod weights;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ReviewCorpus, Timestamp};
use crate::error::{Error, Result};
use crate::params::HyperParams;

pub use weights::{
    path_similarity, path_tokens, weight_pr_contributor, weight_pr_pr, weight_pr_reviewer,
};
pub(crate) use weights::{pr_pr_from_tokens, TokenInterner, TokenizedFiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Pr,
    Developer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub index: usize,
    pub kind: VertexKind,
    /// PR id or developer id in the corpus.
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    PrReviewer,
    PrContributor,
    PrPr,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::PrReviewer, EdgeKind::PrContributor, EdgeKind::PrPr];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub kind: EdgeKind,
    /// Vertex indices. PR-bearing edges list the PR vertex first.
    pub members: Vec<usize>,
    pub raw_weight: f64,
    /// Normalized weight in [0, 1].
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypergraph {
    vertices: Vec<Vertex>,
    edges: Vec<Hyperedge>,
    t_s: Timestamp,
    t_e: Timestamp,
    #[serde(skip)]
    lookup: HashMap<(VertexKind, String), usize>,
}

impl Hypergraph {
    /// Assembles a graph from explicit parts, checking every structural
    /// invariant. Weights are taken as given.
    pub fn from_parts(
        vertices: Vec<(VertexKind, String)>,
        edges: Vec<Hyperedge>,
        bounds: (Timestamp, Timestamp),
    ) -> Result<Self> {
        let mut graph = Hypergraph {
            vertices: Vec::with_capacity(vertices.len()),
            edges: Vec::new(),
            t_s: bounds.0,
            t_e: bounds.1,
            lookup: HashMap::new(),
        };
        for (kind, id) in vertices {
            if graph.lookup.contains_key(&(kind, id.clone())) {
                return Err(Error::InvalidParameter(format!("duplicate vertex {kind:?} `{id}`")));
            }
            graph.add_vertex(kind, &id);
        }
        for edge in edges {
            graph.check_edge(&edge)?;
            graph.edges.push(edge);
        }
        Ok(graph)
    }

    fn check_edge(&self, edge: &Hyperedge) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if let Some(&m) = edge.members.iter().find(|&&m| m >= self.vertices.len()) {
            return bad(format!("edge member {m} is not a vertex"));
        }
        if !(edge.raw_weight >= 0.0 && edge.raw_weight.is_finite()) {
            return bad(format!("raw weight {} is not a finite non-negative number", edge.raw_weight));
        }
        if !(0.0..=1.0).contains(&edge.weight) {
            return bad(format!("weight {} outside [0, 1]", edge.weight));
        }
        let kinds: Vec<VertexKind> = edge.members.iter().map(|&m| self.vertices[m].kind).collect();
        let mut distinct = edge.members.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let shape_ok = distinct.len() == edge.members.len()
            && match edge.kind {
                EdgeKind::PrPr => kinds == [VertexKind::Pr, VertexKind::Pr],
                EdgeKind::PrContributor => kinds == [VertexKind::Pr, VertexKind::Developer],
                EdgeKind::PrReviewer => {
                    kinds.len() >= 2
                        && kinds[0] == VertexKind::Pr
                        && kinds[1..].iter().all(|k| *k == VertexKind::Developer)
                }
            };
        if !shape_ok {
            return bad(format!("{:?} edge has invalid members {:?}", edge.kind, edge.members));
        }
        Ok(())
    }

    pub(crate) fn add_vertex(&mut self, kind: VertexKind, id: &str) -> usize {
        if let Some(&idx) = self.lookup.get(&(kind, id.to_string())) {
            return idx;
        }
        let index = self.vertices.len();
        self.vertices.push(Vertex {
            index,
            kind,
            id: id.to_string(),
        });
        self.lookup.insert((kind, id.to_string()), index);
        index
    }

    pub(crate) fn push_edge(&mut self, edge: Hyperedge) {
        self.edges.push(edge);
    }

    pub(crate) fn set_t_e(&mut self, t_e: Timestamp) {
        self.t_e = t_e;
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn bounds(&self) -> (Timestamp, Timestamp) {
        (self.t_s, self.t_e)
    }

    pub fn vertex_index(&self, kind: VertexKind, id: &str) -> Option<usize> {
        self.lookup.get(&(kind, id.to_string())).copied()
    }

    /// Smallest and largest raw weight of a kind, if any edge exists.
    pub fn raw_range(&self, kind: EdgeKind) -> Option<(f64, f64)> {
        self.edges_of(kind).fold(None, |acc, e| match acc {
            None => Some((e.raw_weight, e.raw_weight)),
            Some((lo, hi)) => Some((lo.min(e.raw_weight), hi.max(e.raw_weight))),
        })
    }

    /// Rescales each kind's raw weights onto [0, 1]. A kind whose raw
    /// weights are all equal gets weight 1.
    pub fn normalize(&mut self) {
        for kind in EdgeKind::ALL {
            if let Some((lo, hi)) = self.raw_range(kind) {
                for e in self.edges.iter_mut().filter(|e| e.kind == kind) {
                    e.weight = min_max(e.raw_weight, lo, hi);
                }
            }
        }
    }

    /// Re-creates the id lookup after deserialization.
    pub fn reindex(&mut self) {
        self.lookup = self
            .vertices
            .iter()
            .map(|v| ((v.kind, v.id.clone()), v.index))
            .collect();
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("serializing graph", e))
    }
}

/// Min-max maps `raw` from `[lo, hi]` onto [0, 1], clamping values outside
/// the range. A degenerate range maps to 1.
pub(crate) fn min_max(raw: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((raw - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Normalizes a graph's weights; see [`Hypergraph::normalize`].
pub fn normalize_weights(mut graph: Hypergraph) -> Hypergraph {
    graph.normalize();
    graph
}

/// Orders PR-PR candidates: heavier first, then older, then smaller id.
pub(crate) fn candidate_order(
    a: (f64, Timestamp, &str),
    b: (f64, Timestamp, &str),
) -> Ordering {
    b.0.total_cmp(&a.0)
        .then(a.1.cmp(&b.1))
        .then_with(|| a.2.cmp(b.2))
}

/// Builds the base hypergraph of a cleaned corpus.
pub fn build(corpus: &ReviewCorpus, params: &HyperParams) -> Result<Hypergraph> {
    params.validate()?;
    let (t_s, t_e) = (corpus.t_s(), corpus.t_e());
    let prs = corpus.prs();
    let mut graph = Hypergraph {
        vertices: Vec::new(),
        edges: Vec::new(),
        t_s,
        t_e,
        lookup: HashMap::new(),
    };

    let mut pr_vertex = Vec::with_capacity(prs.len());
    for pr in prs {
        let pv = graph.add_vertex(VertexKind::Pr, &pr.id);
        pr_vertex.push(pv);
        let cv = graph.add_vertex(VertexKind::Developer, &pr.contributor);
        let reviewers = pr.reviewers();
        let rvs: Vec<usize> = reviewers
            .iter()
            .map(|r| graph.add_vertex(VertexKind::Developer, r))
            .collect();

        graph.edges.push(Hyperedge {
            kind: EdgeKind::PrContributor,
            members: vec![pv, cv],
            raw_weight: weight_pr_contributor(pr.created_at, t_s, t_e),
            weight: 0.0,
        });
        if !rvs.is_empty() {
            let mut members = vec![pv];
            members.extend(rvs);
            graph.edges.push(Hyperedge {
                kind: EdgeKind::PrReviewer,
                members,
                raw_weight: weight_pr_reviewer(pr, reviewers.iter().copied(), params.lambda, t_s, t_e),
                weight: 0.0,
            });
        }
    }

    let mut interner = TokenInterner::default();
    let files: Vec<TokenizedFiles> = prs
        .iter()
        .map(|p| interner.file_set(&p.file_paths, params.similarity_unit))
        .collect();

    // Each PR nominates its top-m partners; an unordered pair is kept when
    // either endpoint nominates it. The weight of a pair is always computed
    // with the lower corpus index first so both nominations agree bitwise.
    let nominations: Vec<Vec<(usize, f64)>> = (0..prs.len())
        .into_par_iter()
        .map(|i| {
            let mut cands: Vec<(usize, f64)> = (0..prs.len())
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let (lo, hi) = (i.min(j), i.max(j));
                    let w = pr_pr_from_tokens(
                        &files[lo],
                        prs[lo].created_at,
                        &files[hi],
                        prs[hi].created_at,
                        t_s,
                        t_e,
                    );
                    (w > 0.0).then_some((j, w))
                })
                .collect();
            cands.sort_by(|a, b| {
                candidate_order(
                    (a.1, prs[a.0].created_at, &prs[a.0].id),
                    (b.1, prs[b.0].created_at, &prs[b.0].id),
                )
            });
            cands.truncate(params.m);
            cands
        })
        .collect();

    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, chosen) in nominations.into_iter().enumerate() {
        for (j, w) in chosen {
            pairs.insert((i.min(j), i.max(j)), w);
        }
    }
    for ((i, j), w) in pairs {
        graph.edges.push(Hyperedge {
            kind: EdgeKind::PrPr,
            members: vec![pr_vertex[i], pr_vertex[j]],
            raw_weight: w,
            weight: 0.0,
        });
    }

    graph.normalize();
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{clean, CleanOptions, PrState, PullRequest, ReviewComment};

    pub(crate) fn pr(id: &str, contributor: &str, t: Timestamp, files: &[&str], reviewers: &[&str]) -> PullRequest {
        PullRequest {
            id: id.into(),
            contributor: contributor.into(),
            created_at: t,
            file_paths: files.iter().map(|s| s.to_string()).collect(),
            comments: reviewers
                .iter()
                .map(|r| ReviewComment {
                    author: r.to_string(),
                    created_at: t + 10,
                })
                .collect(),
            state: PrState::Merged,
        }
    }

    fn corpus(prs: Vec<PullRequest>) -> ReviewCorpus {
        let opts = CleanOptions {
            min_reviews: 1,
            ..Default::default()
        };
        clean(prs, &opts).unwrap()
    }

    #[test]
    fn smallest_instance() {
        let c = corpus(vec![pr("1", "A", 0, &["src/x"], &["B", "C"])]);
        let g = build(&c, &HyperParams::default()).unwrap();
        assert_eq!(g.vertices().len(), 4);
        assert_eq!(g.edges_of(EdgeKind::PrContributor).count(), 1);
        let rev: Vec<_> = g.edges_of(EdgeKind::PrReviewer).collect();
        assert_eq!(rev.len(), 1);
        assert_eq!(rev[0].members.len(), 3);
        assert_eq!(g.edges_of(EdgeKind::PrPr).count(), 0);
        // single edge per kind normalizes to 1
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
    }

    #[test]
    fn identical_file_sets_share_one_edge() {
        let c = corpus(vec![
            pr("1", "A", 0, &["src/x"], &["B"]),
            pr("2", "A", 100, &["src/x"], &["B"]),
        ]);
        let g = build(&c, &HyperParams::default()).unwrap();
        let pp: Vec<_> = g.edges_of(EdgeKind::PrPr).collect();
        assert_eq!(pp.len(), 1);
        // contributor vertex reused
        assert_eq!(g.vertices().len(), 4);
    }

    #[test]
    fn top_m_caps_nominations() {
        let prs: Vec<_> = (0..12)
            .map(|i| pr(&format!("p{i:02}"), "A", i * 10, &["src/net/a.c"], &["B"]))
            .collect();
        let c = corpus(prs);
        let params = HyperParams { m: 3, ..Default::default() };
        let g = build(&c, &params).unwrap();
        // every PR nominates exactly 3, the union is bounded by 12 * 3
        let pp = g.edges_of(EdgeKind::PrPr).count();
        assert!(pp <= 36 && pp >= 12 * 3 / 2, "{pp}");
    }

    #[test]
    fn disjoint_trees_have_no_pr_pr_edges() {
        let c = corpus(vec![
            pr("1", "A", 0, &["src/x"], &["B"]),
            pr("2", "A", 100, &["docs/y"], &["B"]),
        ]);
        let g = build(&c, &HyperParams::default()).unwrap();
        assert_eq!(g.edges_of(EdgeKind::PrPr).count(), 0);
    }

    #[test]
    fn normalization_examples() {
        let vertices = vec![
            (VertexKind::Pr, "1".to_string()),
            (VertexKind::Pr, "2".to_string()),
            (VertexKind::Pr, "3".to_string()),
            (VertexKind::Developer, "a".to_string()),
        ];
        let e = |members: Vec<usize>, raw| Hyperedge {
            kind: EdgeKind::PrContributor,
            members,
            raw_weight: raw,
            weight: 0.0,
        };
        let g = Hypergraph::from_parts(
            vertices.clone(),
            vec![e(vec![0, 3], 2.0), e(vec![1, 3], 4.0), e(vec![2, 3], 6.0)],
            (0, 1),
        )
        .unwrap();
        let g = normalize_weights(g);
        let w: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![0.0, 0.5, 1.0]);

        let single = normalize_weights(Hypergraph::from_parts(vertices.clone(), vec![e(vec![0, 3], 0.3)], (0, 1)).unwrap());
        assert_eq!(single.edges()[0].weight, 1.0);

        let empty = Hypergraph::from_parts(vertices, vec![], (0, 1)).unwrap();
        assert_eq!(normalize_weights(empty.clone()), empty);
    }

    #[test]
    fn from_parts_rejects_malformed_edges() {
        let vertices = vec![(VertexKind::Pr, "1".to_string()), (VertexKind::Developer, "a".to_string())];
        let bad = [
            Hyperedge { kind: EdgeKind::PrPr, members: vec![0, 1], raw_weight: 1.0, weight: 1.0 },
            Hyperedge { kind: EdgeKind::PrContributor, members: vec![0, 7], raw_weight: 1.0, weight: 1.0 },
            Hyperedge { kind: EdgeKind::PrReviewer, members: vec![0], raw_weight: 1.0, weight: 1.0 },
            Hyperedge { kind: EdgeKind::PrContributor, members: vec![0, 1], raw_weight: -1.0, weight: 1.0 },
            Hyperedge { kind: EdgeKind::PrContributor, members: vec![0, 1], raw_weight: 1.0, weight: 2.0 },
        ];
        for e in bad {
            assert!(Hypergraph::from_parts(vertices.clone(), vec![e.clone()], (0, 1)).is_err(), "{e:?}");
        }
    }

    #[test]
    fn json_dump_is_stable_and_reloadable() {
        let c = corpus(vec![
            pr("1", "A", 0, &["src/x", "src/y"], &["B", "C"]),
            pr("2", "B", 50, &["src/x"], &["A"]),
            pr("3", "A", 100, &["src/z/q"], &["C"]),
        ]);
        let g1 = build(&c, &HyperParams::default()).unwrap();
        let g2 = build(&c, &HyperParams::default()).unwrap();
        assert_eq!(g1.to_json().unwrap(), g2.to_json().unwrap());
        let mut back: Hypergraph = serde_json::from_str(&g1.to_json().unwrap()).unwrap();
        back.reindex();
        assert_eq!(back, g1);
        assert_eq!(back.vertex_index(VertexKind::Developer, "C"), g1.vertex_index(VertexKind::Developer, "C"));
    }
}
