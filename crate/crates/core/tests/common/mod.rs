//! Naive reference implementations and generators shared by the
//! integration tests. Everything here is written with plain loops and dense
//! matrices, independently of the library code it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::Rng;

use hgrec_core::evaluation::EvalRecord;
use hgrec_core::hypergraph::{EdgeKind, Hyperedge, VertexKind};
use hgrec_core::Hypergraph;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn random_hypergraph(rng: &mut StdRng, max_vertices: usize) -> Hypergraph {
    let n_pr = rng.random_range(2..=max_vertices / 2);
    let n_dev = rng.random_range(2..=max_vertices - n_pr);
    let mut vertices: Vec<(VertexKind, String)> = (0..n_pr).map(|i| (VertexKind::Pr, format!("p{i}"))).collect();
    vertices.extend((0..n_dev).map(|i| (VertexKind::Developer, format!("d{i}"))));
    let dev = |i: usize| n_pr + i;
    let weight = |rng: &mut StdRng| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..=1.0) };

    let mut edges = Vec::new();
    for p in 0..n_pr {
        if rng.random_bool(0.9) {
            let w = weight(rng);
            edges.push(Hyperedge {
                kind: EdgeKind::PrContributor,
                members: vec![p, dev(rng.random_range(0..n_dev))],
                raw_weight: w,
                weight: w,
            });
        }
        if rng.random_bool(0.8) {
            let k = rng.random_range(1..=n_dev.min(4));
            let mut reviewers = BTreeSet::new();
            while reviewers.len() < k {
                reviewers.insert(dev(rng.random_range(0..n_dev)));
            }
            let w = weight(rng);
            edges.push(Hyperedge {
                kind: EdgeKind::PrReviewer,
                members: std::iter::once(p).chain(reviewers).collect(),
                raw_weight: w,
                weight: w,
            });
        }
    }
    for _ in 0..rng.random_range(0..=2 * n_pr) {
        let a = rng.random_range(0..n_pr);
        let b = rng.random_range(0..n_pr);
        if a != b {
            let w = weight(rng);
            edges.push(Hyperedge {
                kind: EdgeKind::PrPr,
                members: vec![a, b],
                raw_weight: w,
                weight: w,
            });
        }
    }
    if edges.is_empty() {
        edges.push(Hyperedge {
            kind: EdgeKind::PrContributor,
            members: vec![0, dev(0)],
            raw_weight: 1.0,
            weight: 1.0,
        });
    }
    Hypergraph::from_parts(vertices, edges, (0, 1)).expect("generated graph is valid")
}

/// `Dv^-1 H W De^-1 H^T` by explicit dense products; zero-degree rows stay 0.
pub fn dense_transition(g: &Hypergraph) -> Vec<Vec<f64>> {
    let n = g.vertices().len();
    let m = g.edges().len();
    let mut h = vec![vec![0.0; m]; n];
    for (e, edge) in g.edges().iter().enumerate() {
        for &v in &edge.members {
            h[v][e] = 1.0;
        }
    }
    let mut dv = vec![0.0; n];
    for v in 0..n {
        for e in 0..m {
            dv[v] += h[v][e] * g.edges()[e].weight;
        }
    }
    let mut de = vec![0.0; m];
    for e in 0..m {
        for v in 0..n {
            de[e] += h[v][e];
        }
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        if dv[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            let mut s = 0.0;
            for e in 0..m {
                s += h[i][e] * g.edges()[e].weight / de[e] * h[j][e];
            }
            a[i][j] = s / dv[i];
        }
    }
    a
}

/// Gaussian elimination with partial pivoting on `(I - alpha A) f = y`.
pub fn dense_solve(a: &[Vec<f64>], alpha: f64, y: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - alpha * a[i][j]).collect();
            row.push(y[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs())).unwrap();
        m.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let factor = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

fn recency(t: i64, t_s: i64, t_e: i64) -> f64 {
    if t_e > t_s {
        ((t - t_e) as f64 / (t_e - t_s) as f64).exp()
    } else {
        1.0
    }
}

/// Sum over reviewers of their comments, ordered by time, decayed by
/// `lambda^(j-1)` and damped by recency.
pub fn naive_pr_reviewer(comments: &[(String, i64)], reviewers: &[String], lambda: f64, t_s: i64, t_e: i64) -> f64 {
    let mut total = 0.0;
    for r in reviewers {
        let mut times = Vec::new();
        for (author, t) in comments {
            if author == r {
                times.push(*t);
            }
        }
        times.sort();
        for (j, t) in times.iter().enumerate() {
            total += lambda.powi(j as i32) * recency(*t, t_s, t_e);
        }
    }
    total
}

pub fn naive_pr_contributor(t: i64, t_s: i64, t_e: i64) -> f64 {
    if t_e <= t_s {
        1.0
    } else {
        (t - t_s) as f64 / (t_e - t_s) as f64
    }
}

pub fn naive_path_similarity(a: &str, b: &str, by_chars: bool) -> f64 {
    let split = |p: &str| -> Vec<String> {
        if by_chars {
            p.chars().map(|c| c.to_string()).collect()
        } else {
            let mut out = Vec::new();
            for part in p.split('/') {
                if !part.is_empty() {
                    out.push(part.to_string());
                }
            }
            out
        }
    };
    let (x, y) = (split(a), split(b));
    let longest = if x.len() > y.len() { x.len() } else { y.len() };
    if longest == 0 {
        return 0.0;
    }
    let mut common = 0;
    while common < x.len() && common < y.len() && x[common] == y[common] {
        common += 1;
    }
    common as f64 / longest as f64
}

pub fn naive_pr_pr(fa: &[String], ta: i64, fb: &[String], tb: i64, t_s: i64, t_e: i64, by_chars: bool) -> f64 {
    if fa.is_empty() || fb.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for a in fa {
        for b in fb {
            sum += naive_path_similarity(a, b, by_chars);
        }
    }
    let gap = (ta - tb).abs();
    let damp = if t_e > t_s { (-(gap as f64) / (t_e - t_s) as f64).exp() } else { 1.0 };
    sum / (fa.len() * fb.len()) as f64 * damp
}

/// Random path over a small alphabet so prefixes collide often.
pub fn random_path(rng: &mut StdRng) -> String {
    const PARTS: [&str; 6] = ["src", "net", "ui", "a", "b.rs", "ab"];
    let depth = rng.random_range(0..=5);
    let mut parts: Vec<&str> = (0..depth).map(|_| PARTS[rng.random_range(0..PARTS.len())]).collect();
    if rng.random_bool(0.1) {
        parts.insert(0, "");
    }
    parts.join("/")
}

/// One-sided p-values `(P(W+ >= w), P(W+ <= w))` by enumerating all sign
/// patterns over average ranks of the non-zero |differences|.
pub fn brute_force_wilcoxon(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| d.abs() > 1e-12).collect();
    let n = d.len();
    if n == 0 {
        return (1.0, 1.0);
    }
    let ranks: Vec<f64> = d
        .iter()
        .map(|di| {
            let below = d.iter().filter(|o| o.abs() < di.abs() - 1e-12).count() as f64;
            let equal = d.iter().filter(|o| (o.abs() - di.abs()).abs() <= 1e-12).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = d.iter().zip(&ranks).filter(|(di, _)| **di > 0.0).map(|(_, r)| r).sum();
    let (mut ge, mut le) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w >= observed - 1e-9 {
            ge += 1;
        }
        if w <= observed + 1e-9 {
            le += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (ge as f64 / total, le as f64 / total)
}

pub fn random_records(rng: &mut StdRng, n_devs: usize) -> Vec<EvalRecord> {
    let devs: Vec<String> = (0..n_devs).map(|i| format!("d{i}")).collect();
    (0..rng.random_range(1..=20))
        .map(|i| {
            let truth = (0..rng.random_range(1..=3)).map(|_| devs[rng.random_range(0..n_devs)].clone()).collect();
            let mut ranked: Vec<String> = Vec::new();
            for _ in 0..rng.random_range(0..=8) {
                let d = devs[rng.random_range(0..n_devs)].clone();
                if !ranked.contains(&d) {
                    ranked.push(d);
                }
            }
            EvalRecord {
                target: format!("t{i}"),
                truth,
                ranked,
            }
        })
        .collect()
}
