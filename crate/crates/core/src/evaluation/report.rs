//! CSV, JSON and plain-text renderings of an evaluation report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{EvaluationReport, Metric};
use crate::error::{Error, Result};

/// Formats `x` with 9 significant digits, without exponent for ordinary
/// magnitudes and without trailing zeros.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "recommender,round,test_month,k,n_prs,acc,mrr,rd";

/// Paths written by [`EvaluationReport::write`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
}

impl EvaluationReport {
    /// One row per recommender, round and `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for result in &self.results {
            for row in &result.rows {
                let round = self.rounds.iter().find(|r| r.index == row.round).expect("round summary");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    result.recommender.label(),
                    row.round,
                    round.test_month,
                    row.k,
                    round.n_targets,
                    format_sig(row.acc),
                    format_sig(row.mrr),
                    format_sig(row.rd),
                );
            }
        }
        out
    }

    /// Averages and pairwise tests as a JSON document.
    pub fn summary_json(&self) -> serde_json::Value {
        let averages: Vec<_> = self
            .results
            .iter()
            .map(|r| {
                let per_k: serde_json::Map<String, serde_json::Value> = self
                    .ks
                    .iter()
                    .map(|&k| {
                        let m: serde_json::Map<String, serde_json::Value> = Metric::ALL
                            .iter()
                            .map(|&metric| {
                                let v = self.average(r.recommender, k, metric).unwrap_or(f64::NAN);
                                (metric.name().to_string(), json!(format_sig(v).parse::<f64>().ok()))
                            })
                            .collect();
                        (k.to_string(), m.into())
                    })
                    .collect();
                json!({ "recommender": r.recommender.label(), "key": r.recommender.key(), "averages": per_k })
            })
            .collect();
        let tests: Vec<_> = self
            .tests
            .iter()
            .map(|t| {
                let round = |x: f64| format_sig(x).parse::<f64>().unwrap_or(x);
                json!({
                    "reference": t.reference.label(),
                    "other": t.other.label(),
                    "k": t.k,
                    "metric": t.metric.name(),
                    "n": t.result.n,
                    "w_plus": t.result.w_plus,
                    "w_minus": t.result.w_minus,
                    "statistic": t.result.statistic,
                    "p_value": round(t.result.p_two_sided),
                    "p_greater": round(t.result.p_greater),
                    "p_less": round(t.result.p_less),
                    "exact": t.result.exact,
                    "verdict": t.result.verdict,
                })
            })
            .collect();
        json!({
            "ks": self.ks,
            "rounds": self.rounds,
            "recommenders": averages,
            "wilcoxon": tests,
        })
    }

    /// Human-readable AVG table plus the Wilcoxon block.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<14}", "AVG");
        for &k in &self.ks {
            for metric in Metric::ALL {
                let _ = write!(out, " {:>10}", format!("{}@{k}", metric.name()));
            }
        }
        out.push('\n');
        for r in &self.results {
            let _ = write!(out, "{:<14}", r.recommender.label());
            for &k in &self.ks {
                for metric in Metric::ALL {
                    let v = self.average(r.recommender, k, metric).unwrap_or(f64::NAN);
                    let _ = write!(out, " {v:>10.4}");
                }
            }
            out.push('\n');
        }
        if !self.tests.is_empty() {
            out.push_str("\nWilcoxon signed-rank (reference vs other, per-round values)\n");
            for t in &self.tests {
                let _ = writeln!(
                    out,
                    "{} vs {:<12} {:>3}@{:<2} n={:<3} W={:<7} p={:<12} {:?}",
                    t.reference.label(),
                    t.other.label(),
                    t.metric.name(),
                    t.k,
                    t.result.n,
                    t.result.statistic,
                    format_sig(t.result.p_two_sided),
                    t.result.verdict,
                );
            }
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<ReportFiles> {
        let csv = stem.with_extension("csv");
        let json_path = stem.with_extension("json");
        if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(format!("writing {}", csv.display()), e))?;
        let body = serde_json::to_string_pretty(&self.summary_json())
            .map_err(|e| Error::json(format!("serializing {}", json_path.display()), e))?;
        std::fs::write(&json_path, body + "\n").map_err(|e| Error::io(format!("writing {}", json_path.display()), e))?;
        Ok(ReportFiles { csv, json: json_path })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666667");
        assert_eq!(format_sig(0.000976562500), "0.0009765625");
        assert_eq!(format_sig(123.456789012), "123.456789");
        assert_eq!(format_sig(-0.125), "-0.125");
    }
}
