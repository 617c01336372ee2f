//! The cleaned-corpus artifact written by `ingest`.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hgrec_core::config::RunConfig;
use hgrec_core::corpus::{clean, parse_export, CorpusStats, ErrorPolicy};
use hgrec_core::{Error, Result, ReviewCorpus};

const FORMAT: &str = "hgrec-corpus/1";

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusArtifact {
    pub format: String,
    /// Hash of the raw export together with the cleaning options.
    pub source_sha256: String,
    pub stats: CorpusStats,
    pub corpus: ReviewCorpus,
}

fn cleaning_key(cfg: &RunConfig) -> Result<String> {
    let opts = cfg.clean_options()?;
    let patterns: Vec<&str> = opts.bot_patterns.iter().map(|r| r.as_str()).collect();
    Ok(serde_json::json!({
        "bot_patterns": patterns,
        "min_reviews": opts.min_reviews,
        "excluded": opts.excluded_accounts,
    })
    .to_string())
}

/// Hash identifying the artifact that `input` and the cleaning options produce.
pub fn source_hash(input: &Path, cfg: &RunConfig) -> Result<String> {
    let bytes = std::fs::read(input).map_err(|e| Error::io(format!("reading {}", input.display()), e))?;
    let mut h = Sha256::new();
    h.update(&bytes);
    h.update([0u8]);
    h.update(cleaning_key(cfg)?.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Parses and cleans a raw export.
pub fn ingest(input: &Path, cfg: &RunConfig) -> Result<CorpusArtifact> {
    let file = File::open(input).map_err(|e| Error::io(format!("opening {}", input.display()), e))?;
    let policy = match cfg.error_budget {
        None => ErrorPolicy::FailFast,
        Some(budget) => ErrorPolicy::Skip { budget },
    };
    let path = input.display().to_string();
    let outcome = parse_export(BufReader::new(file), policy).map_err(|e| e.in_file(&path))?;
    if !outcome.skipped.is_empty() {
        log::warn!("{path}: skipped {} malformed record(s)", outcome.skipped.len());
    }
    let raw = outcome.prs.len();
    let corpus = clean(outcome.prs, &cfg.clean_options()?).map_err(|e| e.in_file(&path))?;
    log::info!("{path}: {raw} record(s), {} kept after cleaning", corpus.prs().len());
    Ok(CorpusArtifact {
        format: FORMAT.into(),
        source_sha256: source_hash(input, cfg)?,
        stats: corpus.stats(),
        corpus,
    })
}

impl CorpusArtifact {
    pub fn load(path: &Path) -> Result<Self> {
        let shown = path.display().to_string();
        let file = File::open(path).map_err(|e| Error::io(format!("opening {shown}"), e))?;
        let artifact: CorpusArtifact = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::json(format!("parsing corpus artifact {shown}"), e))?;
        if artifact.format != FORMAT {
            return Err(Error::InvalidParameter(format!(
                "{shown}: unsupported artifact format `{}` (expected `{FORMAT}`)",
                artifact.format
            )));
        }
        artifact.corpus.validate().map_err(|e| e.in_file(&shown))?;
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
        let body = serde_json::to_string(self).map_err(|e| Error::json("serializing corpus", e))?;
        std::fs::write(path, body + "\n").map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

/// The corpus named by the configuration.
///
/// With both `input` and `corpus` set, the artifact is reused when its hash
/// matches and rebuilt otherwise.
pub fn obtain(cfg: &RunConfig) -> Result<ReviewCorpus> {
    match (&cfg.input, &cfg.corpus) {
        (Some(input), Some(cached)) => {
            if cached.exists() {
                let artifact = CorpusArtifact::load(cached)?;
                if artifact.source_sha256 == source_hash(input, cfg)? {
                    log::info!("{}: up to date", cached.display());
                    return Ok(artifact.corpus);
                }
                log::info!("{}: stale, re-ingesting {}", cached.display(), input.display());
            }
            let artifact = ingest(input, cfg)?;
            artifact.save(cached)?;
            Ok(artifact.corpus)
        }
        (Some(input), None) => Ok(ingest(input, cfg)?.corpus),
        (None, Some(cached)) => Ok(CorpusArtifact::load(cached)?.corpus),
        (None, None) => Err(Error::InvalidParameter(
            "no corpus given: pass --input <export.jsonl> or --corpus <artifact.json>".into(),
        )),
    }
}
