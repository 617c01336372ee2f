//! Run configuration shared by the command-line subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::corpus::{CleanOptions, DEFAULT_BOT_PATTERN};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluationConfig, RdPopulation, RecommenderKind};
use crate::params::HyperParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Raw JSONL export.
    pub input: Option<PathBuf>,
    /// Cleaned corpus artifact.
    pub corpus: Option<PathBuf>,
    /// Bot account patterns, one regex per line.
    pub bots: Option<PathBuf>,
    /// Extra bot patterns given inline.
    pub bot_patterns: Vec<String>,
    /// Accounts to drop, one per line.
    pub exclude: Option<PathBuf>,
    pub min_reviews: usize,
    /// Malformed input lines tolerated before failing; `None` fails on the first.
    pub error_budget: Option<usize>,
    pub params: HyperParams,
    pub recommenders: Vec<RecommenderKind>,
    pub top_k: usize,
    pub ks: Vec<usize>,
    pub initial_months: u32,
    pub max_rounds: u32,
    pub rd_population: RdPopulation,
    pub baselines: BaselineConfig,
    /// Report files go to `<output>/report.{csv,json}`.
    pub output: PathBuf,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let eval = EvaluationConfig::default();
        RunConfig {
            input: None,
            corpus: None,
            bots: None,
            bot_patterns: Vec::new(),
            exclude: None,
            min_reviews: CleanOptions::default().min_reviews,
            error_budget: None,
            params: HyperParams::default(),
            recommenders: vec![RecommenderKind::HgRec],
            top_k: 5,
            ks: eval.ks,
            initial_months: eval.initial_months,
            max_rounds: eval.max_rounds,
            rd_population: eval.rd_population,
            baselines: eval.baselines,
            output: PathBuf::from("report"),
            jobs: None,
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(format!("parsing config {}", path.display()), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidParameter("jobs must be at least 1".into()));
        }
        self.evaluation().validate()
    }

    /// Cleaning options, reading the bot and exclusion files if set. The
    /// default bot pattern is used when no pattern is configured at all.
    pub fn clean_options(&self) -> Result<CleanOptions> {
        let mut patterns = self.bot_patterns.clone();
        if let Some(path) = &self.bots {
            patterns.extend(read_lines(path)?);
        }
        if patterns.is_empty() {
            patterns.push(DEFAULT_BOT_PATTERN.to_string());
        }
        let mut opts = CleanOptions::with_patterns(&patterns)?;
        opts.min_reviews = self.min_reviews;
        if let Some(path) = &self.exclude {
            opts.excluded_accounts = read_lines(path)?.into_iter().collect();
        }
        Ok(opts)
    }

    pub fn evaluation(&self) -> EvaluationConfig {
        EvaluationConfig {
            initial_months: self.initial_months,
            max_rounds: self.max_rounds,
            ks: self.ks.clone(),
            params: self.params,
            baselines: self.baselines,
            rd_population: self.rd_population,
        }
    }
}
