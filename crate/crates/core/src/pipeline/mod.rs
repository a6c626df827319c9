//! Curve-table ingestion, the end-to-end analysis of a (curve, D, p)
//! triple, and report persistence.

mod analysis;
mod records;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use analysis::{analyze, analyze_batch, with_generator, Job};
pub use records::{ingest_curves, parse_curves, CurveRecord, Ingested, LineError};
pub use report::{
    canonical_json, emit_report, render_markdown, AnalysisReport, ConjecturalTarget, CurveSummary, DistributionSummary,
    GeneratorSource, GeneratorSummary, HeegnerSummary, IndexSummary, ReportFormat, SCHEMA_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("mod-p image hypothesis not certified: {0}")]
    HypothesisNotCertified(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> PipelineError {
        PipelineError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for bad input, 3 for failed computations, 4 for an uncertified
    /// image hypothesis.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Validation(_) | PipelineError::Io { .. } => 2,
            PipelineError::Computation(_) => 3,
            PipelineError::HypothesisNotCertified(_) => 4,
        }
    }
}

/// Analysis settings, read from `key = value` lines and overridden by
/// command-line flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub precision_digits: u32,
    pub qseries_max_terms: usize,
    /// Kolyvagin primes and Frobenius witnesses are searched up to here.
    pub sieve_bound: u64,
    /// Bound passed to the naive point search when a record has no generator.
    pub search_height_bound: u64,
    pub seed: u64,
    pub allow_unverified_hypothesis: bool,
    /// Check the distribution relation at the smallest Kolyvagin prime.
    pub distribution_check: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            precision_digits: 80,
            qseries_max_terms: 400_000,
            sieve_bound: 100_000,
            search_height_bound: 100,
            seed: 0,
            allow_unverified_hypothesis: false,
            distribution_check: true,
        }
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let bad = |what: &str| PipelineError::Validation(format!("config key {key}: {what} {value:?}"));
        let v = value.trim();
        match key.trim() {
            "precision_digits" => self.precision_digits = v.parse().map_err(|_| bad("expected an integer, got"))?,
            "qseries_max_terms" => self.qseries_max_terms = v.parse().map_err(|_| bad("expected an integer, got"))?,
            "sieve_bound" => self.sieve_bound = parse_u64(v).ok_or_else(|| bad("expected an integer, got"))?,
            "search_height_bound" => {
                self.search_height_bound = v.parse().map_err(|_| bad("expected an integer, got"))?
            }
            "seed" => self.seed = v.parse().map_err(|_| bad("expected an integer, got"))?,
            "allow_unverified_hypothesis" => {
                self.allow_unverified_hypothesis = v.parse().map_err(|_| bad("expected true or false, got"))?
            }
            "distribution_check" => {
                self.distribution_check = v.parse().map_err(|_| bad("expected true or false, got"))?
            }
            other => return Err(PipelineError::Validation(format!("unknown config key {other:?}"))),
        }
        if self.precision_digits == 0 {
            return Err(PipelineError::Validation("precision_digits must be positive".into()));
        }
        Ok(())
    }

    /// `key = value` per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config, PipelineError> {
        let mut c = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Validation(format!("config line {}: expected key = value", i + 1)))?;
            c.set(k, v)?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Config::parse(&text)
    }
}

/// Integers, allowing `1e5` style powers of ten.
fn parse_u64(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse() {
        return Some(v);
    }
    let (m, e) = s.split_once(['e', 'E'])?;
    let m: u64 = m.parse().ok()?;
    m.checked_mul(10u64.checked_pow(e.parse().ok()?)?)
}
