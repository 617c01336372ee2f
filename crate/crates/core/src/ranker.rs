//! Query-seeded ranking on a hypergraph.
//!
//! The transition operator is `A = Dv^-1 H W De^-1 H^T` with `d(v)` the
//! weighted vertex degree and `δ(e)` the edge cardinality, which makes every
//! non-isolated row of `A` sum to one. The ranking vector solves
//! `(I - αA) f = y`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::params::{HyperParams, SolverKind};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Non-zero `(column, value)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Incidence structure, weights and degrees of one hypergraph, plus the
/// derived transition matrix.
#[derive(Debug, Clone)]
pub struct RankingSystem {
    members: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
    edge_weight: Vec<f64>,
    vertex_degree: Vec<f64>,
    edge_degree: Vec<usize>,
    alpha: f64,
    transition: Csr,
}

impl RankingSystem {
    pub fn n_vertices(&self) -> usize {
        self.incident.len()
    }

    pub fn n_edges(&self) -> usize {
        self.members.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `W`: normalized edge weights.
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weight
    }

    /// `Dv`: `d(v) = Σ_e w(e) h(v, e)`.
    pub fn vertex_degrees(&self) -> &[f64] {
        &self.vertex_degree
    }

    /// `De`: `δ(e) = Σ_v h(v, e)`.
    pub fn edge_degrees(&self) -> &[usize] {
        &self.edge_degree
    }

    /// `H` as a |V| x |E| 0/1 matrix.
    pub fn incidence(&self) -> Csr {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        for edges in &self.incident {
            indices.extend(edges.iter().copied());
            indptr.push(indices.len());
        }
        let values = vec![1.0; indices.len()];
        Csr {
            rows: self.n_vertices(),
            cols: self.n_edges(),
            indptr,
            indices,
            values,
        }
    }

    /// Vertices with zero weighted degree. Their transition rows are zero.
    pub fn is_isolated(&self, v: usize) -> bool {
        self.vertex_degree[v] <= 0.0
    }
}

/// Materializes `H`, `W`, `Dv`, `De` and `A` for a graph.
pub fn assemble(graph: &Hypergraph, alpha: f64) -> Result<RankingSystem> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if graph.edges().is_empty() {
        return Err(Error::NoEdges);
    }
    let n = graph.vertices().len();
    let members: Vec<Vec<usize>> = graph.edges().iter().map(|e| e.members.clone()).collect();
    let edge_weight: Vec<f64> = graph.edges().iter().map(|e| e.weight).collect();
    let edge_degree: Vec<usize> = members.iter().map(Vec::len).collect();

    let mut incident = vec![Vec::new(); n];
    let mut vertex_degree = vec![0.0; n];
    for (e, vs) in members.iter().enumerate() {
        for &v in vs {
            incident[v].push(e);
            vertex_degree[v] += edge_weight[e];
        }
    }

    let transition = transition_rows(&members, &incident, &edge_weight, &vertex_degree);
    Ok(RankingSystem {
        members,
        incident,
        edge_weight,
        vertex_degree,
        edge_degree,
        alpha,
        transition,
    })
}

fn transition_rows(
    members: &[Vec<usize>],
    incident: &[Vec<usize>],
    edge_weight: &[f64],
    vertex_degree: &[f64],
) -> Csr {
    let n = incident.len();
    let mut indptr = Vec::with_capacity(n + 1);
    indptr.push(0);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut acc = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    for v in 0..n {
        if vertex_degree[v] > 0.0 {
            for &e in &incident[v] {
                let share = edge_weight[e] / members[e].len() as f64 / vertex_degree[v];
                if share == 0.0 {
                    continue;
                }
                for &u in &members[e] {
                    if acc[u] == 0.0 {
                        touched.push(u);
                    }
                    acc[u] += share;
                }
            }
            touched.sort_unstable();
            for &u in &touched {
                indices.push(u);
                values.push(acc[u]);
                acc[u] = 0.0;
            }
            touched.clear();
        }
        indptr.push(indices.len());
    }
    Csr {
        rows: n,
        cols: n,
        indptr,
        indices,
        values,
    }
}

/// The row-stochastic transition matrix `A`.
pub fn transition_matrix(sys: &RankingSystem) -> &Csr {
    &sys.transition
}

/// Query indicator vector over the graph's vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector(Vec<f64>);

impl QueryVector {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidParameter("query entries must be 0 or 1".into()));
        }
        if !y.iter().any(|&v| v == 1.0) {
            return Err(Error::InvalidParameter("query vector has no nonzero entry".into()));
        }
        Ok(QueryVector(y))
    }

    pub fn indicator(n: usize, support: &[usize]) -> Result<Self> {
        let mut y = vec![0.0; n];
        for &i in support {
            if i >= n {
                return Err(Error::InvalidParameter(format!("query index {i} out of range")));
            }
            y[i] = 1.0;
        }
        QueryVector::new(y)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Ranking scores per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingVector {
    pub scores: Vec<f64>,
    /// Iterations used by the iterative solver; 0 for the direct solve.
    pub iterations: usize,
}

fn check_len(sys: &RankingSystem, y: &QueryVector) -> Result<()> {
    if y.0.len() != sys.n_vertices() {
        return Err(Error::InvalidParameter(format!(
            "query has {} entries for {} vertices",
            y.0.len(),
            sys.n_vertices()
        )));
    }
    Ok(())
}

/// `f = (I - αA)^-1 y` by dense LU factorization.
pub fn solve_direct(sys: &RankingSystem, y: &QueryVector) -> Result<RankingVector> {
    check_len(sys, y)?;
    let n = sys.n_vertices();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for (j, v) in sys.transition.row(i) {
            m[(i, j)] -= sys.alpha * v;
        }
    }
    let rhs = DVector::from_column_slice(y.as_slice());
    let f = m.lu().solve(&rhs).ok_or(Error::Singular)?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(RankingVector {
        scores: f.iter().copied().collect(),
        iterations: 0,
    })
}

/// Fixed-point iteration `f <- αAf + y` from `f = y` until the max-norm
/// change drops below `tol`.
pub fn solve_iterative(sys: &RankingSystem, y: &QueryVector, tol: f64, max_iter: usize) -> Result<RankingVector> {
    check_len(sys, y)?;
    let y = y.as_slice();
    let mut f = y.to_vec();
    let mut next = vec![0.0; f.len()];
    let mut change = f64::INFINITY;
    for iteration in 1..=max_iter {
        sys.transition.matvec(&f, &mut next);
        change = 0.0;
        for ((n, &old), &yi) in next.iter_mut().zip(&f).zip(y) {
            *n = sys.alpha * *n + yi;
            change = change.max((*n - old).abs());
        }
        std::mem::swap(&mut f, &mut next);
        if change < tol {
            return Ok(RankingVector {
                scores: f,
                iterations: iteration,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: change,
    })
}

/// Solves with the solver selected in `params`.
pub fn solve(sys: &RankingSystem, y: &QueryVector, params: &HyperParams) -> Result<RankingVector> {
    let direct = match params.solver {
        SolverKind::Direct => true,
        SolverKind::Iterative => false,
        SolverKind::Auto => sys.n_vertices() <= HyperParams::DIRECT_SOLVE_MAX_VERTICES,
    };
    if direct {
        solve_direct(sys, y)
    } else {
        solve_iterative(sys, y, params.tol, params.max_iter)
    }
}
