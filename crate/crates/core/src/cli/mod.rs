//! `hgrec` command-line interface.

mod artifact;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use hgrec_core::baselines::recommend_baseline;
use hgrec_core::config::RunConfig;
use hgrec_core::corpus::parse_timestamp;
use hgrec_core::evaluation::{run_comparison, span_months, RdPopulation, RecommenderKind};
use hgrec_core::params::{SimilarityUnit, SolverKind};
use hgrec_core::{build, Error, Recommender, Result, ReviewCorpus, TargetPr};

#[derive(Debug, Parser)]
#[command(name = "hgrec", version, about = "Code reviewer recommendation on a PR/developer hypergraph")]
pub struct Cli {
    /// JSON run configuration; command-line flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for graph construction and evaluation [default: logical cores]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Log progress to stderr (repeat for more detail)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and clean a JSONL export into a corpus artifact
    Ingest(IngestArgs),
    /// Print corpus counts
    Stats(StatsArgs),
    /// Recommend reviewers for one pull request
    Recommend(RecommendArgs),
    /// Run the monthly expanding-window evaluation
    Evaluate(EvaluateArgs),
    /// Evaluate several recommenders side by side (at least two)
    Compare(EvaluateArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// Raw JSONL export
    #[arg(short, long, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Corpus artifact; rebuilt from --input when its hash is stale
    #[arg(short, long, value_name = "FILE")]
    corpus: Option<PathBuf>,

    /// Bot account patterns, one regex per line [default: `\[bot\]$`]
    #[arg(long, value_name = "FILE")]
    bots: Option<PathBuf>,

    /// Accounts to drop, one per line [default: none]
    #[arg(long, value_name = "FILE")]
    exclude: Option<PathBuf>,

    /// Reviewers with fewer reviewed PRs lose their comments [default: 2]
    #[arg(long, value_name = "N")]
    min_reviews: Option<usize>,

    /// Skip up to N malformed lines instead of failing on the first [default: fail fast]
    #[arg(long, value_name = "N")]
    error_budget: Option<usize>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Regularization weight in (0, 1) [default: 0.9]
    #[arg(long)]
    alpha: Option<f64>,

    /// PR-PR connections nominated per PR, 1 to 100 [default: 10]
    #[arg(long)]
    m: Option<usize>,

    /// Decay for repeated comments by one reviewer, in (0, 1] [default: 0.8]
    #[arg(long)]
    lambda: Option<f64>,

    /// Linear solver [default: auto]
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,

    /// Iterative solver tolerance [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,

    /// Iterative solver iteration cap [default: 10000]
    #[arg(long)]
    max_iter: Option<usize>,

    /// Unit for file path similarity [default: components]
    #[arg(long, value_enum)]
    similarity_unit: Option<SimilarityUnit>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Where to write the corpus artifact [default: --corpus, else corpus.json]
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Also write the hypergraph built from the corpus as JSON
    #[arg(long, value_name = "FILE")]
    dump_graph: Option<PathBuf>,

    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Recommender: hgrec, ac, revfinder, chrev or cn [default: hgrec]
    #[arg(long)]
    recommender: Option<RecommenderKind>,

    /// Number of reviewers to return [default: 5]
    #[arg(short = 'k', long)]
    top_k: Option<usize>,

    /// Target PR as JSON: {"id", "contributor", "created_at", "files"}
    #[arg(long, value_name = "FILE", conflicts_with_all = ["files", "contributor", "time"])]
    target: Option<PathBuf>,

    /// Changed files of the target, comma separated or repeated
    #[arg(long, value_delimiter = ',', value_name = "PATH")]
    files: Vec<String>,

    /// Author of the target
    #[arg(long)]
    contributor: Option<String>,

    /// Creation time of the target, RFC 3339 [default: the corpus's last event]
    #[arg(long)]
    time: Option<String>,

    /// Identifier of the target [default: target]
    #[arg(long)]
    id: Option<String>,

    /// Write the hypergraph with the target grafted in as JSON (hgrec only)
    #[arg(long, value_name = "FILE")]
    dump_graph: Option<PathBuf>,

    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Recommenders, comma separated [default: hgrec; compare: all five]
    #[arg(long, alias = "recommender", value_delimiter = ',')]
    recommenders: Vec<RecommenderKind>,

    /// Cutoffs for ACC, MRR and RD, comma separated [default: 1,3,5]
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,

    /// Months of history before the first test month [default: 12]
    #[arg(long)]
    initial_months: Option<u32>,

    /// Maximum number of monthly rounds [default: 30]
    #[arg(long)]
    max_rounds: Option<u32>,

    /// Reviewer population for RD [default: round]
    #[arg(long, value_enum)]
    rd_population: Option<RdPopulation>,

    /// AC-s activity window in days [default: 90]
    #[arg(long)]
    ac_window_days: Option<u32>,

    /// CN-s decay per older interaction [default: 0.8]
    #[arg(long)]
    cn_decay: Option<f64>,

    /// Output directory for report.csv and report.json [default: report]
    #[arg(short, long, value_name = "DIR")]
    output: Option<PathBuf>,

    #[command(flatten)]
    model: ModelArgs,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl SourceArgs {
    fn apply(self, cfg: &mut RunConfig) {
        if self.input.is_some() {
            cfg.input = self.input;
        }
        if self.corpus.is_some() {
            cfg.corpus = self.corpus;
        }
        if self.bots.is_some() {
            cfg.bots = self.bots;
        }
        if self.exclude.is_some() {
            cfg.exclude = self.exclude;
        }
        set(&mut cfg.min_reviews, self.min_reviews);
        if self.error_budget.is_some() {
            cfg.error_budget = self.error_budget;
        }
    }
}

impl ModelArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let p = &mut cfg.params;
        set(&mut p.alpha, self.alpha);
        set(&mut p.m, self.m);
        set(&mut p.lambda, self.lambda);
        set(&mut p.solver, self.solver);
        set(&mut p.tol, self.tol);
        set(&mut p.max_iter, self.max_iter);
        set(&mut p.similarity_unit, self.similarity_unit);
    }
}

#[derive(Debug, Deserialize)]
struct TargetFile {
    #[serde(default)]
    id: Option<String>,
    contributor: String,
    created_at: String,
    files: Vec<String>,
}

fn timestamp(raw: &str, what: &str) -> Result<i64> {
    parse_timestamp(raw).map_err(|e| Error::InvalidParameter(format!("{what}: invalid RFC 3339 time `{raw}`: {e}")))
}

fn load_target(path: &Path) -> Result<TargetPr> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {shown}"), e))?;
    let t: TargetFile =
        serde_json::from_str(&text).map_err(|e| Error::json(format!("parsing target {shown}"), e))?;
    Ok(TargetPr {
        id: t.id.unwrap_or_else(|| "target".into()),
        contributor: t.contributor,
        created_at: timestamp(&t.created_at, &shown)?,
        file_paths: t.files,
    })
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json("serializing output", e))?;
    println!("{text}");
    Ok(())
}

fn write_graph(path: &Path, graph: &hgrec_core::Hypergraph) -> Result<()> {
    std::fs::write(path, graph.to_json()? + "\n").map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    log::info!("graph written to {}", path.display());
    Ok(())
}

fn stats_json(corpus: &ReviewCorpus) -> serde_json::Value {
    let s = corpus.stats();
    serde_json::json!({
        "prs": s.prs,
        "comments": s.comments,
        "reviewers": s.reviewers,
        "contributors": s.contributors,
        "months": span_months(corpus),
    })
}

impl Cli {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        Ok(cfg)
    }

    pub fn verbosity(&self) -> u8 {
        self.verbose
    }

    pub fn run(self) -> Result<()> {
        let mut cfg = self.config()?;
        let init_pool = |cfg: &RunConfig| -> Result<()> {
            cfg.validate()?;
            if let Some(n) = cfg.jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::InvalidParameter(format!("jobs: {e}")))?;
            }
            Ok(())
        };
        match self.command {
            Command::Ingest(args) => {
                args.source.apply(&mut cfg);
                args.model.apply(&mut cfg);
                init_pool(&cfg)?;
                let input = cfg
                    .input
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("ingest needs --input <export.jsonl>".into()))?;
                let output = args
                    .output
                    .or_else(|| cfg.corpus.clone())
                    .unwrap_or_else(|| PathBuf::from("corpus.json"));
                let artifact = artifact::ingest(&input, &cfg)?;
                artifact.save(&output)?;
                if let Some(path) = args.dump_graph {
                    write_graph(&path, &build(&artifact.corpus, &cfg.params)?)?;
                }
                print_json(&stats_json(&artifact.corpus))
            }
            Command::Stats(args) => {
                args.source.apply(&mut cfg);
                init_pool(&cfg)?;
                print_json(&stats_json(&artifact::obtain(&cfg)?))
            }
            Command::Recommend(args) => {
                args.source.apply(&mut cfg);
                args.model.apply(&mut cfg);
                set(&mut cfg.top_k, args.top_k);
                init_pool(&cfg)?;
                let kind = args
                    .recommender
                    .or_else(|| cfg.recommenders.first().copied())
                    .unwrap_or(RecommenderKind::HgRec);
                let corpus = artifact::obtain(&cfg)?;
                let target = match args.target {
                    Some(path) => load_target(&path)?,
                    None => TargetPr {
                        id: args.id.unwrap_or_else(|| "target".into()),
                        contributor: args
                            .contributor
                            .ok_or_else(|| Error::InvalidParameter("--contributor is required without --target".into()))?,
                        created_at: match &args.time {
                            Some(t) => timestamp(t, "--time")?,
                            None => corpus.t_e(),
                        },
                        file_paths: args.files,
                    },
                };
                if target.file_paths.is_empty() {
                    return Err(Error::EmptyTarget(target.id));
                }
                let rec = match kind {
                    RecommenderKind::HgRec => {
                        let r = Recommender::new(std::sync::Arc::new(corpus), cfg.params)?;
                        if let Some(path) = &args.dump_graph {
                            write_graph(path, &r.graft(&target)?)?;
                        }
                        r.recommend(&target, cfg.top_k)?
                    }
                    RecommenderKind::Baseline(b) => {
                        if args.dump_graph.is_some() {
                            return Err(Error::InvalidParameter("--dump-graph needs --recommender hgrec".into()));
                        }
                        recommend_baseline(b, &corpus, &target, cfg.top_k, &cfg.baselines)?
                    }
                };
                print_json(&serde_json::json!({
                    "recommender": kind.label(),
                    "target": rec.target,
                    "k": rec.k,
                    "short_list": rec.short_list,
                    "candidates": rec.candidates,
                }))
            }
            Command::Evaluate(args) => evaluate(args, cfg, false, init_pool),
            Command::Compare(args) => evaluate(args, cfg, true, init_pool),
        }
    }
}

fn evaluate(
    args: EvaluateArgs,
    mut cfg: RunConfig,
    compare: bool,
    init_pool: impl Fn(&RunConfig) -> Result<()>,
) -> Result<()> {
    args.source.apply(&mut cfg);
    args.model.apply(&mut cfg);
    if !args.recommenders.is_empty() {
        cfg.recommenders = args.recommenders;
    } else if compare && cfg.recommenders.len() < 2 {
        cfg.recommenders = ["hgrec", "ac", "revfinder", "chrev", "cn"]
            .iter()
            .map(|s| s.parse().expect("known recommender"))
            .collect();
    }
    if !args.ks.is_empty() {
        cfg.ks = args.ks;
    }
    set(&mut cfg.initial_months, args.initial_months);
    set(&mut cfg.max_rounds, args.max_rounds);
    set(&mut cfg.rd_population, args.rd_population);
    set(&mut cfg.baselines.ac_window_days, args.ac_window_days);
    set(&mut cfg.baselines.cn_decay, args.cn_decay);
    set(&mut cfg.output, args.output);
    init_pool(&cfg)?;
    let mut distinct = cfg.recommenders.clone();
    distinct.sort();
    distinct.dedup();
    if compare && distinct.len() < 2 {
        return Err(Error::InvalidParameter("compare needs at least two different recommenders".into()));
    }

    let corpus = artifact::obtain(&cfg)?;
    let report = run_comparison(&corpus, &cfg.recommenders, &cfg.evaluation())?;
    let files = report.write(&cfg.output.join("report"))?;
    print!("{}", report.to_table());
    println!("\n{} round(s); wrote {} and {}", report.rounds.len(), files.csv.display(), files.json.display());
    Ok(())
}
