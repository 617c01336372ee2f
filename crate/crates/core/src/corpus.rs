//! Review-history data model, JSONL ingestion and cleaning.
//!
//! A raw export holds one pull request per line. [`parse_export`] turns it
//! into [`PullRequest`] records and [`clean`] applies the filtering rules
//! (open PRs, bot accounts, one-off reviewers) to produce an immutable
//! [`ReviewCorpus`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use chrono::DateTime;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

/// Matches the `[bot]` suffix GitHub gives app accounts.
pub const DEFAULT_BOT_PATTERN: &str = r"\[bot\]$";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Developer {
    pub id: String,
    pub is_bot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewComment {
    pub author: String,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrState {
    Merged,
    Closed,
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequest {
    pub id: String,
    pub contributor: String,
    pub created_at: Timestamp,
    /// Changed files, deduplicated, in first-seen order.
    pub file_paths: Vec<String>,
    pub comments: Vec<ReviewComment>,
    pub state: PrState,
}

impl PullRequest {
    /// Distinct comment authors other than the contributor.
    pub fn reviewers(&self) -> BTreeSet<&str> {
        self.comments
            .iter()
            .map(|c| c.author.as_str())
            .filter(|a| *a != self.contributor)
            .collect()
    }

    /// Timestamps of `reviewer`'s comments on this PR, ascending.
    pub fn comment_times(&self, reviewer: &str) -> Vec<Timestamp> {
        let mut times: Vec<Timestamp> = self
            .comments
            .iter()
            .filter(|c| c.author == reviewer)
            .map(|c| c.created_at)
            .collect();
        times.sort_unstable();
        times
    }
}

/// How [`parse_export`] reacts to malformed lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorPolicy {
    FailFast,
    /// Skip bad lines; fail once more than `budget` lines were skipped.
    Skip { budget: usize },
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub prs: Vec<PullRequest>,
    /// Errors for lines that were skipped under [`ErrorPolicy::Skip`].
    pub skipped: Vec<Error>,
}

/// Parses a JSONL export, one pull request per non-blank line.
pub fn parse_export<R: BufRead>(reader: R, policy: ErrorPolicy) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("line {lineno}"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, lineno) {
            Ok(pr) => out.prs.push(pr),
            Err(err) => match policy {
                ErrorPolicy::FailFast => return Err(err),
                ErrorPolicy::Skip { budget } => {
                    log::warn!("skipping record: {err}");
                    out.skipped.push(err);
                    if out.skipped.len() > budget {
                        return Err(Error::ErrorBudget {
                            skipped: out.skipped.len(),
                            budget,
                        });
                    }
                }
            },
        }
    }
    Ok(out)
}

fn parse_line(line: &str, lineno: usize) -> Result<PullRequest> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::Record {
        line: lineno,
        message: format!("malformed JSON: {e}"),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Record {
        line: lineno,
        message: "expected a JSON object".into(),
    })?;

    let id = id_field(obj, "id", lineno)?;
    let contributor = id_field(obj, "contributor", lineno)?;
    let created_at = time_field(obj, "created_at", lineno)?;
    let state = match str_field(obj, "state", lineno)? {
        "merged" => PrState::Merged,
        "closed" => PrState::Closed,
        "open" => PrState::Open,
        other => {
            return Err(Error::Record {
                line: lineno,
                message: format!("unknown state `{other}`"),
            })
        }
    };

    let files = array_field(obj, "files", lineno)?;
    let mut file_paths: Vec<String> = Vec::with_capacity(files.len());
    for f in files {
        let path = f.as_str().ok_or_else(|| Error::Record {
            line: lineno,
            message: "`files` entries must be strings".into(),
        })?;
        if !path.is_empty() && !file_paths.iter().any(|p| p == path) {
            file_paths.push(path.to_string());
        }
    }

    let raw_comments = array_field(obj, "comments", lineno)?;
    let mut comments = Vec::with_capacity(raw_comments.len());
    for (i, c) in raw_comments.iter().enumerate() {
        let c = c.as_object().ok_or_else(|| Error::Record {
            line: lineno,
            message: format!("comments[{i}] is not an object"),
        })?;
        let author = id_field(c, "author", lineno).map_err(|e| prefix_field(e, i))?;
        let created_at = time_field(c, "created_at", lineno).map_err(|e| prefix_field(e, i))?;
        comments.push(ReviewComment { author, created_at });
    }
    // stable: equal timestamps keep input order
    comments.sort_by_key(|c| c.created_at);

    Ok(PullRequest {
        id,
        contributor,
        created_at,
        file_paths,
        comments,
        state,
    })
}

fn prefix_field(err: Error, i: usize) -> Error {
    match err {
        Error::MissingField { line, field } => Error::MissingField {
            line,
            field: format!("comments[{i}].{field}"),
        },
        other => other,
    }
}

fn get<'a>(obj: &'a serde_json::Map<String, Value>, field: &str, line: usize) -> Result<&'a Value> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(Error::MissingField {
            line,
            field: field.to_string(),
        }),
        Some(v) => Ok(v),
    }
}

fn str_field<'a>(obj: &'a serde_json::Map<String, Value>, field: &str, line: usize) -> Result<&'a str> {
    get(obj, field, line)?.as_str().ok_or_else(|| Error::Record {
        line,
        message: format!("`{field}` must be a string"),
    })
}

/// Identifiers are strings, but numeric ids from some exporters are accepted.
fn id_field(obj: &serde_json::Map<String, Value>, field: &str, line: usize) -> Result<String> {
    let id = match get(obj, field, line)? {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => {
            return Err(Error::Record {
                line,
                message: format!("`{field}` must be a string"),
            })
        }
    };
    if id.is_empty() {
        return Err(Error::Record {
            line,
            message: format!("`{field}` is empty"),
        });
    }
    Ok(id)
}

fn time_field(obj: &serde_json::Map<String, Value>, field: &str, line: usize) -> Result<Timestamp> {
    let raw = str_field(obj, field, line)?;
    parse_timestamp(raw).map_err(|e| Error::Record {
        line,
        message: format!("`{field}`: {e}"),
    })
}

fn array_field<'a>(
    obj: &'a serde_json::Map<String, Value>,
    field: &str,
    line: usize,
) -> Result<&'a Vec<Value>> {
    get(obj, field, line)?.as_array().ok_or_else(|| Error::Record {
        line,
        message: format!("`{field}` must be an array"),
    })
}

/// Parses an RFC 3339 timestamp to whole epoch seconds.
pub fn parse_timestamp(raw: &str) -> std::result::Result<Timestamp, chrono::ParseError> {
    DateTime::parse_from_rfc3339(raw).map(|t| t.timestamp())
}

/// Cleaning rules applied by [`clean`].
#[derive(Debug, Clone)]
pub struct CleanOptions {
    pub bot_patterns: Vec<Regex>,
    /// Reviewers with fewer distinct reviewed PRs lose their comments.
    pub min_reviews: usize,
    /// Accounts whose comments are dropped (e.g. deleted accounts).
    pub excluded_accounts: BTreeSet<String>,
}

impl CleanOptions {
    pub fn with_patterns<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let bot_patterns = patterns
            .iter()
            .map(|p| {
                Regex::new(p.as_ref()).map_err(|source| Error::BotPattern {
                    pattern: p.as_ref().to_string(),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CleanOptions {
            bot_patterns,
            min_reviews: 2,
            excluded_accounts: BTreeSet::new(),
        })
    }

    pub fn is_bot(&self, account: &str) -> bool {
        self.bot_patterns.iter().any(|re| re.is_match(account))
    }
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions::with_patterns(&[DEFAULT_BOT_PATTERN]).expect("default pattern compiles")
    }
}

/// A cleaned, chronologically ordered review history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewCorpus {
    prs: Vec<PullRequest>,
    t_s: Timestamp,
    t_e: Timestamp,
    developers: BTreeMap<String, Developer>,
}

/// Corpus size summary: PRs, review comments, reviewers, contributors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub prs: usize,
    pub comments: usize,
    pub reviewers: usize,
    pub contributors: usize,
}

/// Filters raw pull requests into a [`ReviewCorpus`].
///
/// Steps, in order: drop open PRs and PRs opened by bots; drop comments by
/// bots and excluded accounts; drop PRs without changed files; drop the
/// review comments of reviewers active on fewer than `min_reviews` distinct
/// PRs. The threshold is applied once.
pub fn clean(raw: Vec<PullRequest>, opts: &CleanOptions) -> Result<ReviewCorpus> {
    let mut seen = BTreeSet::new();
    let mut prs: Vec<PullRequest> = Vec::with_capacity(raw.len());
    for mut pr in raw {
        if !seen.insert(pr.id.clone()) {
            return Err(Error::DuplicatePr(pr.id));
        }
        if pr.state == PrState::Open || opts.is_bot(&pr.contributor) {
            continue;
        }
        pr.comments
            .retain(|c| !opts.is_bot(&c.author) && !opts.excluded_accounts.contains(&c.author));
        if pr.file_paths.is_empty() {
            continue;
        }
        pr.comments.sort_by_key(|c| c.created_at);
        prs.push(pr);
    }

    let mut reviewed: HashMap<String, usize> = HashMap::new();
    for pr in &prs {
        for r in pr.reviewers() {
            *reviewed.entry(r.to_string()).or_default() += 1;
        }
    }
    for pr in &mut prs {
        let contributor = pr.contributor.clone();
        pr.comments.retain(|c| {
            c.author == contributor || reviewed.get(&c.author).copied().unwrap_or(0) >= opts.min_reviews
        });
    }

    prs.sort_by_key(|p| p.created_at);
    ReviewCorpus::from_sorted(prs)
}

/// For each PR, the distinct comment authors other than its contributor.
pub fn reviewer_sets(corpus: &ReviewCorpus) -> BTreeMap<String, BTreeSet<String>> {
    corpus
        .prs
        .iter()
        .map(|pr| {
            (
                pr.id.clone(),
                pr.reviewers().into_iter().map(str::to_string).collect(),
            )
        })
        .collect()
}

impl ReviewCorpus {
    fn from_sorted(prs: Vec<PullRequest>) -> Result<Self> {
        if prs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let times = prs
            .iter()
            .flat_map(|p| std::iter::once(p.created_at).chain(p.comments.iter().map(|c| c.created_at)));
        let (t_s, t_e) = times.fold((Timestamp::MAX, Timestamp::MIN), |(lo, hi), t| (lo.min(t), hi.max(t)));
        let mut developers = BTreeMap::new();
        for pr in &prs {
            for id in std::iter::once(&pr.contributor).chain(pr.comments.iter().map(|c| &c.author)) {
                developers.entry(id.clone()).or_insert_with(|| Developer {
                    id: id.clone(),
                    is_bot: false,
                });
            }
        }
        Ok(ReviewCorpus {
            prs,
            t_s,
            t_e,
            developers,
        })
    }

    pub fn prs(&self) -> &[PullRequest] {
        &self.prs
    }

    pub fn into_prs(self) -> Vec<PullRequest> {
        self.prs
    }

    pub fn t_s(&self) -> Timestamp {
        self.t_s
    }

    pub fn t_e(&self) -> Timestamp {
        self.t_e
    }

    pub fn developers(&self) -> &BTreeMap<String, Developer> {
        &self.developers
    }

    pub fn is_bot(&self, id: &str) -> bool {
        self.developers.get(id).is_some_and(|d| d.is_bot)
    }

    pub fn pr(&self, id: &str) -> Option<&PullRequest> {
        self.prs.iter().find(|p| p.id == id)
    }

    /// Number of review comments (comments on someone else's PR) per developer.
    pub fn review_comment_counts(&self) -> HashMap<&str, usize> {
        let mut counts = HashMap::new();
        for pr in &self.prs {
            for c in &pr.comments {
                if c.author != pr.contributor {
                    *counts.entry(c.author.as_str()).or_default() += 1;
                }
            }
        }
        counts
    }

    /// Developers appearing in at least one reviewer set.
    pub fn reviewer_ids(&self) -> BTreeSet<&str> {
        self.prs.iter().flat_map(|p| p.reviewers()).collect()
    }

    pub fn stats(&self) -> CorpusStats {
        let comments = self
            .prs
            .iter()
            .map(|p| p.comments.iter().filter(|c| c.author != p.contributor).count())
            .sum();
        let contributors: BTreeSet<&str> = self.prs.iter().map(|p| p.contributor.as_str()).collect();
        CorpusStats {
            prs: self.prs.len(),
            comments,
            reviewers: self.reviewer_ids().len(),
            contributors: contributors.len(),
        }
    }

    /// The history visible at `cut`: PRs created before it, keeping only
    /// comments also made before it. Time bounds are recomputed.
    pub fn before(&self, cut: Timestamp) -> Result<ReviewCorpus> {
        let prs = self
            .prs
            .iter()
            .filter(|p| p.created_at < cut)
            .map(|p| {
                let mut p = p.clone();
                p.comments.retain(|c| c.created_at < cut);
                p
            })
            .collect();
        let mut out = ReviewCorpus::from_sorted(prs)?;
        for (id, dev) in out.developers.iter_mut() {
            dev.is_bot = self.is_bot(id);
        }
        Ok(out)
    }

    /// Checks the structural invariants of a corpus loaded from disk.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = ReviewCorpus::from_sorted(self.prs.clone())?;
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("corpus artifact: {msg}")));
        if self.prs.windows(2).any(|w| w[0].created_at > w[1].created_at) {
            return bad("pull requests are not in chronological order");
        }
        if rebuilt.t_s != self.t_s || rebuilt.t_e != self.t_e {
            return bad("time bounds do not match the data");
        }
        if rebuilt.developers.keys().any(|k| !self.developers.contains_key(k)) {
            return bad("developer index is incomplete");
        }
        if self.prs.iter().any(|p| p.file_paths.is_empty()) {
            return bad("pull request without changed files");
        }
        Ok(())
    }
}
