//! The analysis report, its canonical JSON form and a markdown rendering.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::records::big_ints;
use super::{Config, PipelineError};
use crate::curve::{LocalData, RationalPoint};
use crate::galois::ImageVerdict;
use crate::heegner::{EigenSign, RecognizedOn, Status};
use crate::kolyvagin::{BoundReport, KolyvaginPrime};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSummary {
    pub label: String,
    #[serde(with = "big_ints")]
    pub a: Vec<BigInt>,
    pub conductor: String,
    pub discriminant: String,
    pub torsion_order: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeegnerSummary {
    pub status: Status,
    pub eigen: Option<EigenSign>,
    /// The recognized point is `multiplier * y_K`.
    pub multiplier: u32,
    pub forms: usize,
    pub qseries_terms: usize,
    pub recognized_on: Option<RecognizedOn>,
    /// Squarefree `d` of the twist carrying the point, if not `E` itself.
    pub twist_d: Option<i64>,
    pub point: Option<RationalPoint>,
    pub height: Option<String>,
    pub analytic_height: Option<String>,
    /// Distance between the analytic and exact coordinates.
    pub residual: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSource {
    Record,
    Search,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSummary {
    pub source: GeneratorSource,
    pub point: RationalPoint,
    pub height: String,
    /// `certified` (with the prime `l` used) or `inconclusive`.
    pub saturation: String,
    pub saturation_prime: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSummary {
    /// `h(k y_K) / h(g)`.
    pub ratio: String,
    pub root: String,
    pub m0: u32,
}

/// The unevaluated prediction for `m_inf`, kept next to the proved lower
/// bound so the two are not confused.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjecturalTarget {
    pub statement: String,
    /// `sum_q ord_p(c_q)`.
    pub predicted_value: u32,
    pub evaluated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSummary {
    pub l: u64,
    pub a_l: Option<i64>,
    pub digits: u32,
    pub residual: Option<String>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub curve: CurveSummary,
    pub d: u64,
    pub beta: u64,
    pub class_number: usize,
    pub p: u64,
    pub config: Config,
    pub hypothesis_star: ImageVerdict,
    /// The image was not certified and the run went ahead anyway.
    pub hypothesis_overridden: bool,
    pub heegner: HeegnerSummary,
    pub generator: GeneratorSummary,
    pub index: IndexSummary,
    pub m0: u32,
    pub local_data: Vec<LocalData>,
    pub m_max: u32,
    pub bounds: BoundReport,
    pub m_infinity_lower_bound: u32,
    pub conjectural_m_infinity: ConjecturalTarget,
    pub kolyvagin_primes: Vec<KolyvaginPrime>,
    pub distribution: Option<DistributionSummary>,
    pub caveats: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown format {s:?}; use json or markdown")),
        }
    }
}

/// Pretty JSON with keys sorted at every level and a trailing newline.
pub fn canonical_json(report: &AnalysisReport) -> String {
    // serde_json::Map is a BTreeMap here, so going through Value sorts keys
    let v = serde_json::to_value(report).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn render_markdown(r: &AnalysisReport) -> String {
    let b = &r.bounds;
    let mut s = String::new();
    let _ = writeln!(s, "# {} with D = {}, p = {}\n", r.curve.label, r.d, r.p);
    let a: Vec<String> = r.curve.a.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(s, "- model: [{}], conductor {}", a.join(", "), r.curve.conductor);
    let _ = writeln!(s, "- beta = {}, h(-D) = {}", r.beta, r.class_number);
    let _ = writeln!(
        s,
        "- image mod p: {:?}{}",
        r.hypothesis_star.status,
        if r.hypothesis_overridden { " (overridden)" } else { "" }
    );
    if let Some(pt) = &r.heegner.point {
        let _ = writeln!(s, "- {} * y_K = {pt}", r.heegner.multiplier);
    }
    let _ = writeln!(s, "- generator ({:?}): {}", r.generator.source, r.generator.point);
    let _ = writeln!(s, "- height ratio {} = {}^2, m0 = {}", r.index.ratio, r.index.root, r.m0);
    let _ = writeln!(s, "- m_max = {}, m_inf >= {}", r.m_max, r.m_infinity_lower_bound);
    let _ = writeln!(s, "- Kolyvagin primes up to {}: {}\n", r.config.sieve_bound, r.kolyvagin_primes.len());
    let _ = writeln!(s, "| q | Kodaira | c_q | ord_p(c_q) |\n|---|---|---|---|");
    for d in &r.local_data {
        let v = b.tamagawa_valuations.get(&d.q).copied().unwrap_or(0);
        let _ = writeln!(s, "| {} | {} | {} | {} |", d.q, d.kodaira, d.tamagawa, v);
    }
    let _ = writeln!(s, "\n| bound | exponent | #Sha[p^inf] <= |\n|---|---|---|");
    for (name, e) in [("Kolyvagin", b.exponent_kolyvagin), ("improved", b.exponent_improved), ("BSD", b.exponent_bsd)] {
        let _ = writeln!(s, "| {name} | {e} | {}^{e} |", r.p);
    }
    if let Some(dist) = &r.distribution {
        let res = dist.residual.as_deref().or(dist.error.as_deref()).unwrap_or("-");
        let _ = writeln!(
            s,
            "\nDistribution relation at l = {}: {} ({res})",
            dist.l,
            if dist.passed { "passed" } else { "failed" }
        );
    }
    if !r.caveats.is_empty() {
        let _ = writeln!(s, "\n## Caveats\n");
        for c in &r.caveats {
            let _ = writeln!(s, "- {c}");
        }
    }
    s
}

/// Write the report under `out_dir` as `{label}-D{d}-p{p}-{hash}.{ext}`,
/// where `hash` starts the SHA-256 of the canonical JSON.
pub fn emit_report(report: &AnalysisReport, format: ReportFormat, out_dir: &Path) -> Result<PathBuf, PipelineError> {
    let json = canonical_json(report);
    let hash = Sha256::digest(json.as_bytes());
    let hex: String = hash.iter().take(6).map(|b| format!("{b:02x}")).collect();
    let safe: String = report
        .curve
        .label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '-' })
        .collect();
    let (body, ext) = match format {
        ReportFormat::Json => (json, "json"),
        ReportFormat::Markdown => (render_markdown(report), "md"),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| PipelineError::io(out_dir, e))?;
    let path = out_dir.join(format!("{safe}-D{}-p{}-{hex}.{ext}", report.d, report.p));
    std::fs::write(&path, body).map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}
