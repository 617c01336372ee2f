//! Expanding-window evaluation.
//!
//! Round `r` trains on every calendar month before month `initial + r` and
//! tests on that month. Each recommender is scored per round with ACC, MRR
//! and RD at several `k`, and compared against a reference recommender with
//! the Wilcoxon signed-rank test over the per-round values.

mod metrics;
mod report;
mod wilcoxon;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{recommend_baseline, BaselineConfig, BaselineKind};
use crate::corpus::{ReviewCorpus, Timestamp};
use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::recommender::{Recommendation, Recommender, TargetPr};

pub use metrics::{acc, distinct_recommended, mrr, rd, EvalRecord};
pub use report::{format_sig, ReportFiles};
pub use wilcoxon::{doubled_signed_ranks, wilcoxon_signed_rank, Verdict, WilcoxonResult, EXACT_MAX_N, SIGNIFICANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RecommenderKind {
    HgRec,
    Baseline(BaselineKind),
}

impl RecommenderKind {
    pub fn label(self) -> &'static str {
        match self {
            RecommenderKind::HgRec => "HGRec",
            RecommenderKind::Baseline(b) => b.label(),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            RecommenderKind::HgRec => "hgrec",
            RecommenderKind::Baseline(BaselineKind::Ac) => "ac",
            RecommenderKind::Baseline(BaselineKind::RevFinder) => "revfinder",
            RecommenderKind::Baseline(BaselineKind::CHRev) => "chrev",
            RecommenderKind::Baseline(BaselineKind::Cn) => "cn",
        }
    }
}

impl FromStr for RecommenderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "hgrec" => RecommenderKind::HgRec,
            "ac" => RecommenderKind::Baseline(BaselineKind::Ac),
            "revfinder" => RecommenderKind::Baseline(BaselineKind::RevFinder),
            "chrev" => RecommenderKind::Baseline(BaselineKind::CHRev),
            "cn" => RecommenderKind::Baseline(BaselineKind::Cn),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown recommender `{other}` (expected hgrec, ac, revfinder, chrev or cn)"
                )))
            }
        })
    }
}

impl TryFrom<String> for RecommenderKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RecommenderKind> for String {
    fn from(k: RecommenderKind) -> String {
        k.key().to_string()
    }
}

impl fmt::Display for RecommenderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Recommends for a batch of targets from a training corpus.
pub fn recommend_batch(
    kind: RecommenderKind,
    train: Arc<ReviewCorpus>,
    targets: &[TargetPr],
    k: usize,
    params: &HyperParams,
    baselines: &BaselineConfig,
) -> Result<Vec<Recommendation>> {
    match kind {
        RecommenderKind::HgRec => Recommender::new(train, *params)?.recommend_all(targets, k),
        RecommenderKind::Baseline(b) => targets
            .par_iter()
            .map(|t| recommend_baseline(b, &train, t, k, baselines))
            .collect(),
    }
}

/// Population used as `n` in the RD normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RdPopulation {
    /// Distinct reviewers in the round's training window.
    Round,
    /// Distinct reviewers in the whole corpus.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationConfig {
    pub initial_months: u32,
    pub max_rounds: u32,
    pub ks: Vec<usize>,
    pub params: HyperParams,
    pub baselines: BaselineConfig,
    pub rd_population: RdPopulation,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            initial_months: 12,
            max_rounds: 30,
            ks: vec![1, 3, 5],
            params: HyperParams::default(),
            baselines: BaselineConfig::default(),
            rd_population: RdPopulation::Round,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.initial_months == 0 {
            return Err(Error::InvalidParameter("initial_months must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::InvalidParameter("ks must be a non-empty list of positive values".into()));
        }
        Ok(())
    }
}

/// A test target together with its actual reviewers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub target: TargetPr,
    pub truth: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRound {
    /// 1-based.
    pub index: usize,
    /// Training covers `[t_s, cut)`, testing `[cut, test_end)`.
    pub cut: Timestamp,
    pub test_end: Timestamp,
    /// `YYYY-MM` of the test month.
    pub test_month: String,
    /// Test PRs with a non-empty reviewer set.
    pub tests: Vec<TestCase>,
}

fn month_index(ts: Timestamp) -> i64 {
    let d = Utc.timestamp_opt(ts, 0).single().expect("timestamp in range");
    i64::from(d.year()) * 12 + i64::from(d.month0())
}

fn month_start(index: i64) -> Timestamp {
    let (year, month0) = (index.div_euclid(12), index.rem_euclid(12));
    Utc.with_ymd_and_hms(year as i32, month0 as u32 + 1, 1, 0, 0, 0)
        .single()
        .expect("valid month")
        .timestamp()
}

/// Calendar months touched by the corpus, first and last inclusive.
pub fn span_months(corpus: &ReviewCorpus) -> u32 {
    (month_index(corpus.t_e()) - month_index(corpus.t_s()) + 1) as u32
}

/// Splits a corpus into expanding-window rounds.
pub fn make_rounds(corpus: &ReviewCorpus, initial_months: u32, max_rounds: u32) -> Result<Vec<EvaluationRound>> {
    let span = span_months(corpus);
    if initial_months == 0 || span <= initial_months {
        return Err(Error::CorpusTooShort {
            span,
            required: initial_months.max(1) + 1,
        });
    }
    let first = month_index(corpus.t_s());
    let n_rounds = (span - initial_months).min(max_rounds) as usize;
    let rounds = (1..=n_rounds)
        .map(|index| {
            let test_idx = first + i64::from(initial_months) + index as i64 - 1;
            let cut = month_start(test_idx);
            let test_end = month_start(test_idx + 1);
            let tests = corpus
                .prs()
                .iter()
                .filter(|p| p.created_at >= cut && p.created_at < test_end)
                .filter_map(|p| {
                    let truth: BTreeSet<String> = p.reviewers().into_iter().map(str::to_string).collect();
                    (!truth.is_empty()).then(|| TestCase {
                        target: TargetPr::from(p),
                        truth,
                    })
                })
                .collect();
            EvaluationRound {
                index,
                cut,
                test_end,
                test_month: format!("{:04}-{:02}", test_idx.div_euclid(12), test_idx.rem_euclid(12) + 1),
                tests,
            }
        })
        .collect();
    Ok(rounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub round: usize,
    pub k: usize,
    pub acc: f64,
    pub mrr: f64,
    pub rd: f64,
}

/// Per-round results of one recommender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommenderResult {
    pub recommender: RecommenderKind,
    pub rows: Vec<MetricRow>,
    /// Records per evaluated round, aligned with the report's rounds.
    #[serde(skip)]
    pub records: Vec<Vec<EvalRecord>>,
}

impl RecommenderResult {
    /// The metric series over rounds for a given `k`.
    pub fn series(&self, k: usize, metric: Metric) -> Vec<f64> {
        self.rows.iter().filter(|r| r.k == k).map(|r| metric.of(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Metric {
    Acc,
    Mrr,
    Rd,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Acc, Metric::Mrr, Metric::Rd];

    pub fn of(self, row: &MetricRow) -> f64 {
        match self {
            Metric::Acc => row.acc,
            Metric::Mrr => row.mrr,
            Metric::Rd => row.rd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Acc => "ACC",
            Metric::Mrr => "MRR",
            Metric::Rd => "RD",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub index: usize,
    pub test_month: String,
    pub n_targets: usize,
    /// `n` used for RD.
    pub n_reviewers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTest {
    pub reference: RecommenderKind,
    pub other: RecommenderKind,
    pub k: usize,
    pub metric: Metric,
    pub result: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub ks: Vec<usize>,
    pub rounds: Vec<RoundSummary>,
    pub results: Vec<RecommenderResult>,
    pub tests: Vec<PairedTest>,
}

impl EvaluationReport {
    pub fn result(&self, kind: RecommenderKind) -> Option<&RecommenderResult> {
        self.results.iter().find(|r| r.recommender == kind)
    }

    /// Mean of a metric over rounds.
    pub fn average(&self, kind: RecommenderKind, k: usize, metric: Metric) -> Option<f64> {
        let series = self.result(kind)?.series(k, metric);
        (!series.is_empty()).then(|| series.iter().fold(0.0, |a, b| a + b) / series.len() as f64)
    }
}

/// Runs the full protocol for every recommender.
pub fn run_comparison(
    corpus: &ReviewCorpus,
    recommenders: &[RecommenderKind],
    config: &EvaluationConfig,
) -> Result<EvaluationReport> {
    config.validate()?;
    if recommenders.is_empty() {
        return Err(Error::InvalidParameter("at least one recommender is required".into()));
    }
    let mut kinds: Vec<RecommenderKind> = Vec::new();
    for &k in recommenders {
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    let mut ks = config.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let k_max = *ks.last().expect("validated non-empty");
    let global_reviewers = corpus.reviewer_ids().len();

    let rounds: Vec<EvaluationRound> = make_rounds(corpus, config.initial_months, config.max_rounds)?
        .into_iter()
        .filter(|r| {
            if r.tests.is_empty() {
                log::warn!("round {} ({}): no reviewed PRs, skipped", r.index, r.test_month);
            }
            !r.tests.is_empty()
        })
        .collect();

    // per round: (summary, per-recommender records)
    let per_round: Vec<(RoundSummary, Vec<Vec<EvalRecord>>)> = rounds
        .par_iter()
        .map(|round| -> Result<_> {
            let train = Arc::new(corpus.before(round.cut)?);
            let targets: Vec<TargetPr> = round.tests.iter().map(|t| t.target.clone()).collect();
            let mut all = Vec::with_capacity(kinds.len());
            for &kind in &kinds {
                let recs = recommend_batch(kind, Arc::clone(&train), &targets, k_max, &config.params, &config.baselines)?;
                all.push(
                    round
                        .tests
                        .iter()
                        .zip(recs)
                        .map(|(t, r)| EvalRecord {
                            target: t.target.id.clone(),
                            truth: t.truth.clone(),
                            ranked: r.candidates.into_iter().map(|c| c.developer).collect(),
                        })
                        .collect::<Vec<_>>(),
                );
            }
            let population = match config.rd_population {
                RdPopulation::Round => train.reviewer_ids().len(),
                RdPopulation::Global => global_reviewers,
            };
            let n_reviewers = all
                .iter()
                .map(|recs| distinct_recommended(recs, k_max))
                .fold(population, usize::max)
                .max(2);
            log::info!(
                "round {} ({}): {} target(s), {} training PR(s)",
                round.index,
                round.test_month,
                targets.len(),
                train.prs().len()
            );
            Ok((
                RoundSummary {
                    index: round.index,
                    test_month: round.test_month.clone(),
                    n_targets: targets.len(),
                    n_reviewers,
                },
                all,
            ))
        })
        .map(|r| r.map_err(|e| e))
        .collect::<Result<Vec<_>>>()?;

    let mut results: Vec<RecommenderResult> = kinds
        .iter()
        .map(|&kind| RecommenderResult {
            recommender: kind,
            rows: Vec::new(),
            records: Vec::new(),
        })
        .collect();
    let mut summaries = Vec::with_capacity(per_round.len());
    for (summary, all) in per_round {
        for (result, records) in results.iter_mut().zip(all) {
            for &k in &ks {
                let wrap = |e| Error::Round {
                    round: summary.index,
                    source: Box::new(e),
                };
                result.rows.push(MetricRow {
                    round: summary.index,
                    k,
                    acc: acc(&records, k).map_err(wrap)?,
                    mrr: mrr(&records, k).map_err(wrap)?,
                    rd: rd(&records, k, summary.n_reviewers).map_err(wrap)?,
                });
            }
            result.records.push(records);
        }
        summaries.push(summary);
    }

    let mut tests = Vec::new();
    let reference = if kinds.contains(&RecommenderKind::HgRec) {
        RecommenderKind::HgRec
    } else {
        kinds[0]
    };
    let reference_result = results.iter().find(|r| r.recommender == reference).expect("present");
    for other in results.iter().filter(|r| r.recommender != reference) {
        for &k in &ks {
            for metric in Metric::ALL {
                let result = wilcoxon_signed_rank(&reference_result.series(k, metric), &other.series(k, metric))?;
                tests.push(PairedTest {
                    reference,
                    other: other.recommender,
                    k,
                    metric,
                    result,
                });
            }
        }
    }

    Ok(EvaluationReport {
        ks,
        rounds: summaries,
        results,
        tests,
    })
}
