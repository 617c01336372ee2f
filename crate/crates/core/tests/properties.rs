mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use hgrec_core::corpus::{clean, CleanOptions, PrState, PullRequest, ReviewComment};
use hgrec_core::evaluation::{acc, mrr, rd, wilcoxon_signed_rank};
use hgrec_core::hypergraph::{path_similarity, weight_pr_pr, EdgeKind, VertexKind};
use hgrec_core::ranker::{assemble, solve_direct, solve_iterative, transition_matrix, QueryVector};
use hgrec_core::{build, HyperParams, Recommender, ReviewCorpus, SimilarityUnit, TargetPr};

use common::*;

const DEVS: [&str; 6] = ["ann", "ben", "cat", "dan", "eve", "bot[bot]"];
const FILES: [&str; 7] = [
    "src/net/tcp.rs",
    "src/net/udp.rs",
    "src/ui/view.rs",
    "src/ui/widgets/button.rs",
    "docs/index.md",
    "README",
    "src/net/tcp/conn.rs",
];

prop_compose! {
    fn arb_pr(id: usize)(
        contributor in 0..DEVS.len(),
        day in 0i64..400,
        files in proptest::collection::btree_set(0..FILES.len(), 0..4),
        comments in proptest::collection::vec((0..DEVS.len(), 0i64..30), 0..6),
        open in proptest::bool::weighted(0.1),
    ) -> PullRequest {
        PullRequest {
            id: format!("{id}"),
            contributor: DEVS[contributor].into(),
            created_at: day * 86_400,
            file_paths: files.into_iter().map(|f| FILES[f].to_string()).collect(),
            comments: comments
                .into_iter()
                .map(|(a, d)| ReviewComment { author: DEVS[a].into(), created_at: (day + d) * 86_400 })
                .collect(),
            state: if open { PrState::Open } else { PrState::Merged },
        }
    }
}

fn arb_raw(max: usize) -> impl Strategy<Value = Vec<PullRequest>> {
    (2..max).prop_flat_map(|n| (0..n).map(arb_pr).collect::<Vec<_>>())
}

fn arb_corpus(max: usize) -> impl Strategy<Value = ReviewCorpus> {
    arb_raw(max)
        .prop_filter_map("empty after cleaning", |raw| clean(raw, &CleanOptions::default()).ok())
}

fn arb_path() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof!["src", "net", "a", "b.rs", "ab", ""], 0..6).prop_map(|p| p.join("/"))
}

/// Expected PR-PR pairs: every PR nominates its `m` strongest partners.
fn brute_force_pairs(corpus: &ReviewCorpus, m: usize) -> BTreeSet<(String, String)> {
    let prs = corpus.prs();
    let mut pairs = BTreeSet::new();
    for (i, a) in prs.iter().enumerate() {
        let mut cands: Vec<(f64, i64, &str)> = Vec::new();
        for (j, b) in prs.iter().enumerate() {
            if i == j {
                continue;
            }
            let (x, y) = if i < j { (a, b) } else { (b, a) };
            let w = naive_pr_pr(&x.file_paths, x.created_at, &y.file_paths, y.created_at, corpus.t_s(), corpus.t_e(), false);
            if w > 0.0 {
                cands.push((w, b.created_at, &b.id));
            }
        }
        cands.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)).then(p.2.cmp(q.2)));
        for (_, _, other) in cands.into_iter().take(m) {
            let (lo, hi) = if a.id.as_str() < other { (a.id.clone(), other.to_string()) } else { (other.to_string(), a.id.clone()) };
            pairs.insert((lo, hi));
        }
    }
    pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clean_is_idempotent_and_chronological(raw in arb_raw(25)) {
        let opts = CleanOptions::default();
        if let Ok(once) = clean(raw, &opts) {
            prop_assert!(once.prs().windows(2).all(|w| w[0].created_at <= w[1].created_at));
            prop_assert!(once.prs().iter().all(|p| !p.file_paths.is_empty() && p.state != PrState::Open));
            prop_assert!(once.prs().iter().all(|p| p.comments.iter().all(|c| !opts.is_bot(&c.author))));
            let twice = clean(once.clone().into_prs(), &opts).unwrap();
            prop_assert_eq!(twice, once);
        }
    }

    #[test]
    fn path_similarity_is_symmetric_and_bounded(a in arb_path(), b in arb_path(), chars in any::<bool>()) {
        let unit = if chars { SimilarityUnit::Chars } else { SimilarityUnit::Components };
        let s = path_similarity(&a, &b, unit);
        prop_assert_eq!(s, path_similarity(&b, &a, unit));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, naive_path_similarity(&a, &b, chars));
        if a.split('/').any(|c| !c.is_empty()) {
            prop_assert_eq!(path_similarity(&a, &a, unit), 1.0);
        }
    }

    #[test]
    fn pr_pr_weight_is_symmetric(raw in arb_raw(6)) {
        let (a, b) = (&raw[0], &raw[1]);
        for unit in [SimilarityUnit::Components, SimilarityUnit::Chars] {
            let w = weight_pr_pr(a, b, 0, 500 * 86_400, unit);
            // equal up to summation order
            prop_assert!((w - weight_pr_pr(b, a, 0, 500 * 86_400, unit)).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn pr_pr_edges_match_top_m_nominations(corpus in arb_corpus(30), m in 1usize..5) {
        let params = HyperParams { m, ..HyperParams::default() };
        let graph = build(&corpus, &params).unwrap();
        let id = |v: usize| graph.vertices()[v].id.clone();
        let got: BTreeSet<(String, String)> = graph
            .edges_of(EdgeKind::PrPr)
            .map(|e| {
                let (a, b) = (id(e.members[0]), id(e.members[1]));
                if a < b { (a, b) } else { (b, a) }
            })
            .collect();
        prop_assert_eq!(got, brute_force_pairs(&corpus, m));
    }

    #[test]
    fn built_graphs_are_row_stochastic(corpus in arb_corpus(30)) {
        let graph = build(&corpus, &HyperParams::default()).unwrap();
        prop_assert!(graph.edges().iter().all(|e| (0.0..=1.0).contains(&e.weight)));
        let sys = assemble(&graph, 0.9).unwrap();
        let a = transition_matrix(&sys);
        for v in 0..graph.vertices().len() {
            let expected = if sys.is_isolated(v) { 0.0 } else { 1.0 };
            prop_assert!((a.row_sum(v) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn solvers_agree_and_are_linear(seed in any::<u64>(), alpha in 0.05f64..0.98) {
        let g = random_hypergraph(&mut StdRng::seed_from_u64(seed), 60);
        let n = g.vertices().len();
        let sys = assemble(&g, alpha).unwrap();
        let y1 = QueryVector::indicator(n, &[0]).unwrap();
        let y2 = QueryVector::indicator(n, &[n - 1]).unwrap();
        let both = QueryVector::indicator(n, &[0, n - 1]).unwrap();
        let f1 = solve_direct(&sys, &y1).unwrap().scores;
        let f2 = solve_direct(&sys, &y2).unwrap().scores;
        let f = solve_direct(&sys, &both).unwrap().scores;
        let it = solve_iterative(&sys, &both, 1e-13, 100_000).unwrap().scores;
        let oracle = dense_solve(&dense_transition(&g), alpha, both.as_slice());
        for v in 0..n {
            prop_assert!((f[v] - f1[v] - f2[v]).abs() < 1e-9);
            prop_assert!((f[v] - it[v]).abs() < 1e-8);
            prop_assert!((f[v] - oracle[v]).abs() < 1e-9);
            prop_assert!(f[v] >= -1e-12);
        }
    }

    #[test]
    fn metric_identities(seed in any::<u64>(), n_devs in 2usize..10) {
        let records = random_records(&mut StdRng::seed_from_u64(seed), n_devs);
        let mut last = 0.0;
        for k in 1..8 {
            let (a, m, r) = (acc(&records, k).unwrap(), mrr(&records, k).unwrap(), rd(&records, k, n_devs).unwrap());
            prop_assert!(a >= last);
            prop_assert!(m <= a);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r));
            last = a;
        }
    }

    #[test]
    fn wilcoxon_swaps_tails(pairs in proptest::collection::vec((0u8..5, 0u8..5), 0..30)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64 / 4.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64 / 4.0).collect();
        let fwd = wilcoxon_signed_rank(&x, &y).unwrap();
        let back = wilcoxon_signed_rank(&y, &x).unwrap();
        prop_assert!((fwd.p_greater - back.p_less).abs() < 1e-12);
        prop_assert!((fwd.p_less - back.p_greater).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&fwd.p_two_sided));
        prop_assert_eq!(fwd.w_plus, back.w_minus);
    }

    #[test]
    fn recommendations_respect_contract(corpus in arb_corpus(30), contributor in 0..DEVS.len() - 1, files in proptest::collection::btree_set(0..FILES.len(), 1..3)) {
        let Ok(r) = Recommender::new(Arc::new(corpus), HyperParams::default()) else { return Ok(()) };
        let target = TargetPr {
            id: "target".into(),
            contributor: DEVS[contributor].into(),
            created_at: r.corpus().t_e() + 86_400,
            file_paths: files.into_iter().map(|f| FILES[f].to_string()).collect(),
        };
        let full = r.recommend(&target, 6).unwrap();
        prop_assert!(full.developers().all(|d| d != target.contributor && !d.ends_with("[bot]")));
        prop_assert!(full.candidates.windows(2).all(|w| w[0].score >= w[1].score));
        prop_assert!(full.candidates.iter().all(|c| c.score > 0.0));
        let g = r.graft(&target).unwrap();
        prop_assert!(full.developers().all(|d| g.vertex_index(VertexKind::Developer, d).is_some()));
        for k in 1..6 {
            let short = r.recommend(&target, k).unwrap();
            prop_assert_eq!(&short.candidates[..], &full.candidates[..k.min(full.candidates.len())]);
        }
    }
}
