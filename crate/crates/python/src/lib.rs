//! Python bindings: corpus loading, the HGRec recommender, baselines,
//! evaluation metrics and the significance test.

use std::fs::File;
use std::io::BufReader;
use std::str::FromStr;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use hgrec_core::baselines::{recommend_baseline, BaselineConfig};
use hgrec_core::corpus::{parse_timestamp, ErrorPolicy};
use hgrec_core::evaluation::{self, EvalRecord, EvaluationConfig, RdPopulation, RecommenderKind};
use hgrec_core::hypergraph::{path_similarity as core_path_similarity, weight_pr_pr};
use hgrec_core::{clean, parse_export, CleanOptions, Error, SimilarityUnit, SolverKind};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        e if e.is_user_error() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn unit(name: &str) -> PyResult<SimilarityUnit> {
    match name {
        "components" => Ok(SimilarityUnit::Components),
        "chars" => Ok(SimilarityUnit::Chars),
        other => Err(PyValueError::new_err(format!("unknown similarity unit `{other}`"))),
    }
}

/// Accepts epoch seconds or an RFC 3339 string.
fn timestamp(value: &Bound<'_, PyAny>) -> PyResult<i64> {
    if let Ok(secs) = value.extract::<i64>() {
        return Ok(secs);
    }
    let raw: String = value.extract()?;
    parse_timestamp(&raw).map_err(|e| PyValueError::new_err(format!("bad timestamp `{raw}`: {e}")))
}

fn json_to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

#[pyclass(name = "HyperParams", from_py_object)]
#[derive(Clone)]
struct PyHyperParams {
    inner: hgrec_core::HyperParams,
}

#[pymethods]
impl PyHyperParams {
    #[new]
    #[pyo3(signature = (alpha=0.9, m=10, lambda_=0.8, solver="auto", tol=1e-10, max_iter=10_000, similarity_unit="components"))]
    fn new(alpha: f64, m: usize, lambda_: f64, solver: &str, tol: f64, max_iter: usize, similarity_unit: &str) -> PyResult<Self> {
        let solver = match solver {
            "direct" => SolverKind::Direct,
            "iterative" => SolverKind::Iterative,
            "auto" => SolverKind::Auto,
            other => return Err(PyValueError::new_err(format!("unknown solver `{other}`"))),
        };
        let inner = hgrec_core::HyperParams {
            alpha,
            m,
            lambda: lambda_,
            solver,
            tol,
            max_iter,
            similarity_unit: unit(similarity_unit)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyHyperParams { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    fn __repr__(&self) -> String {
        format!("HyperParams({:?})", self.inner)
    }
}

/// A cleaned review history.
#[pyclass(name = "Corpus", frozen)]
struct PyCorpus {
    inner: Arc<hgrec_core::ReviewCorpus>,
}

#[pymethods]
impl PyCorpus {
    /// Reads a JSONL export and cleans it.
    #[staticmethod]
    #[pyo3(signature = (path, bot_patterns=None, min_reviews=2, error_budget=None))]
    fn from_jsonl(path: &str, bot_patterns: Option<Vec<String>>, min_reviews: usize, error_budget: Option<usize>) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        let policy = error_budget.map_or(ErrorPolicy::FailFast, |budget| ErrorPolicy::Skip { budget });
        let outcome = parse_export(BufReader::new(file), policy).map_err(|e| to_py(e.in_file(path)))?;
        let mut opts = match bot_patterns {
            Some(p) => CleanOptions::with_patterns(&p).map_err(to_py)?,
            None => CleanOptions::default(),
        };
        opts.min_reviews = min_reviews;
        let corpus = clean(outcome.prs, &opts).map_err(to_py)?;
        Ok(PyCorpus { inner: Arc::new(corpus) })
    }

    fn __len__(&self) -> usize {
        self.inner.prs().len()
    }

    #[getter]
    fn t_s(&self) -> i64 {
        self.inner.t_s()
    }

    #[getter]
    fn t_e(&self) -> i64 {
        self.inner.t_e()
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.stats();
        let dict = PyDict::new(py);
        dict.set_item("prs", s.prs)?;
        dict.set_item("comments", s.comments)?;
        dict.set_item("reviewers", s.reviewers)?;
        dict.set_item("contributors", s.contributors)?;
        dict.set_item("months", evaluation::span_months(&self.inner))?;
        Ok(dict)
    }

    /// PRs created strictly before `cut`.
    fn before(&self, cut: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = self.inner.before(timestamp(cut)?).map_err(to_py)?;
        Ok(PyCorpus { inner: Arc::new(inner) })
    }

    fn pr_ids(&self) -> Vec<String> {
        self.inner.prs().iter().map(|p| p.id.clone()).collect()
    }
}

fn target(id: &str, contributor: &str, created_at: i64, files: Vec<String>) -> hgrec_core::TargetPr {
    hgrec_core::TargetPr {
        id: id.to_string(),
        contributor: contributor.to_string(),
        created_at,
        file_paths: files,
    }
}

#[pyclass(name = "Recommender", frozen)]
struct PyRecommender {
    inner: hgrec_core::Recommender,
}

#[pymethods]
impl PyRecommender {
    #[new]
    #[pyo3(signature = (corpus, params=None))]
    fn new(corpus: &PyCorpus, params: Option<PyHyperParams>) -> PyResult<Self> {
        let params = params.map(|p| p.inner).unwrap_or_default();
        let inner = hgrec_core::Recommender::new(corpus.inner.clone(), params).map_err(to_py)?;
        Ok(PyRecommender { inner })
    }

    /// Ranked `(developer, score)` pairs for a new PR. `created_at` defaults
    /// to the end of the training history.
    #[pyo3(signature = (files, contributor, created_at=None, k=5, id="target"))]
    fn recommend(
        &self,
        py: Python<'_>,
        files: Vec<String>,
        contributor: &str,
        created_at: Option<&Bound<'_, PyAny>>,
        k: usize,
        id: &str,
    ) -> PyResult<Vec<(String, f64)>> {
        let t = created_at.map(timestamp).transpose()?.unwrap_or(self.inner.corpus().t_e());
        let target = target(id, contributor, t, files);
        let rec = py.detach(|| self.inner.recommend(&target, k)).map_err(to_py)?;
        Ok(rec.candidates.into_iter().map(|c| (c.developer, c.score)).collect())
    }

    fn num_vertices(&self) -> usize {
        self.inner.base().vertices().len()
    }

    fn num_edges(&self) -> usize {
        self.inner.base().edges().len()
    }

    /// The base hypergraph serialized as JSON.
    fn graph_json(&self) -> PyResult<String> {
        self.inner.base().to_json().map_err(to_py)
    }
}

/// Ranks with one of the baselines: `ac`, `revfinder`, `chrev` or `cn`.
#[pyfunction]
#[pyo3(signature = (name, corpus, files, contributor, created_at=None, k=5, id="target"))]
fn recommend_with(
    name: &str,
    corpus: &PyCorpus,
    files: Vec<String>,
    contributor: &str,
    created_at: Option<&Bound<'_, PyAny>>,
    k: usize,
    id: &str,
) -> PyResult<Vec<(String, f64)>> {
    let kind = RecommenderKind::from_str(name).map_err(to_py)?;
    let t = created_at.map(timestamp).transpose()?.unwrap_or(corpus.inner.t_e());
    let target = target(id, contributor, t, files);
    let rec = match kind {
        RecommenderKind::HgRec => hgrec_core::Recommender::new(corpus.inner.clone(), Default::default())
            .and_then(|r| r.recommend(&target, k)),
        RecommenderKind::Baseline(b) => recommend_baseline(b, &corpus.inner, &target, k, &BaselineConfig::default()),
    }
    .map_err(to_py)?;
    Ok(rec.candidates.into_iter().map(|c| (c.developer, c.score)).collect())
}

#[pyfunction]
#[pyo3(signature = (a, b, unit="components"))]
fn path_similarity(a: &str, b: &str, unit: &str) -> PyResult<f64> {
    Ok(core_path_similarity(a, b, self::unit(unit)?))
}

/// PR-PR weight between two file lists created at `ta` and `tb`.
#[pyfunction]
#[pyo3(signature = (files_a, ta, files_b, tb, t_s, t_e, unit="components"))]
fn pr_pr_weight(files_a: Vec<String>, ta: i64, files_b: Vec<String>, tb: i64, t_s: i64, t_e: i64, unit: &str) -> PyResult<f64> {
    let pr = |files: Vec<String>, t: i64| hgrec_core::PullRequest {
        id: String::new(),
        contributor: String::new(),
        created_at: t,
        file_paths: files,
        comments: Vec::new(),
        state: hgrec_core::corpus::PrState::Merged,
    };
    Ok(weight_pr_pr(&pr(files_a, ta), &pr(files_b, tb), t_s, t_e, self::unit(unit)?))
}

fn records(pairs: Vec<(Vec<String>, Vec<String>)>) -> Vec<EvalRecord> {
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (truth, ranked))| EvalRecord {
            target: i.to_string(),
            truth: truth.into_iter().collect(),
            ranked,
        })
        .collect()
}

/// Top-k accuracy over `(truth, ranked)` pairs.
#[pyfunction]
fn acc(records: Vec<(Vec<String>, Vec<String>)>, k: usize) -> PyResult<f64> {
    evaluation::acc(&self::records(records), k).map_err(to_py)
}

#[pyfunction]
fn mrr(records: Vec<(Vec<String>, Vec<String>)>, k: usize) -> PyResult<f64> {
    evaluation::mrr(&self::records(records), k).map_err(to_py)
}

#[pyfunction]
fn rd(records: Vec<(Vec<String>, Vec<String>)>, k: usize, n_reviewers: usize) -> PyResult<f64> {
    evaluation::rd(&self::records(records), k, n_reviewers).map_err(to_py)
}

#[pyfunction]
fn wilcoxon<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = evaluation::wilcoxon_signed_rank(&x, &y).map_err(to_py)?;
    let dict = PyDict::new(py);
    dict.set_item("n", r.n)?;
    dict.set_item("w_plus", r.w_plus)?;
    dict.set_item("w_minus", r.w_minus)?;
    dict.set_item("statistic", r.statistic)?;
    dict.set_item("p_two_sided", r.p_two_sided)?;
    dict.set_item("p_greater", r.p_greater)?;
    dict.set_item("p_less", r.p_less)?;
    dict.set_item("exact", r.exact)?;
    dict.set_item("verdict", format!("{:?}", r.verdict))?;
    Ok(dict)
}

/// Runs the monthly evaluation and returns `(csv, summary)`.
#[pyfunction]
#[pyo3(signature = (corpus, recommenders, ks=vec![1, 3, 5], initial_months=12, max_rounds=30, params=None, rd_population="round"))]
fn evaluate<'py>(
    py: Python<'py>,
    corpus: &PyCorpus,
    recommenders: Vec<String>,
    ks: Vec<usize>,
    initial_months: u32,
    max_rounds: u32,
    params: Option<PyHyperParams>,
    rd_population: &str,
) -> PyResult<(String, Bound<'py, PyAny>)> {
    let kinds = recommenders
        .iter()
        .map(|r| RecommenderKind::from_str(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let rd_population = match rd_population {
        "round" => RdPopulation::Round,
        "global" => RdPopulation::Global,
        other => return Err(PyValueError::new_err(format!("unknown rd population `{other}`"))),
    };
    let config = EvaluationConfig {
        initial_months,
        max_rounds,
        ks,
        params: params.map(|p| p.inner).unwrap_or_default(),
        rd_population,
        ..EvaluationConfig::default()
    };
    let report = py
        .detach(|| evaluation::run_comparison(&corpus.inner, &kinds, &config))
        .map_err(to_py)?;
    Ok((report.to_csv(), json_to_py(py, &report.summary_json())?))
}

#[pymodule]
fn hgrec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHyperParams>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyRecommender>()?;
    m.add_function(wrap_pyfunction!(recommend_with, m)?)?;
    m.add_function(wrap_pyfunction!(path_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(pr_pr_weight, m)?)?;
    m.add_function(wrap_pyfunction!(acc, m)?)?;
    m.add_function(wrap_pyfunction!(mrr, m)?)?;
    m.add_function(wrap_pyfunction!(rd, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
