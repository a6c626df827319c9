//! The pipeline over the frozen table of optimal rank-one curves, checked
//! against values computed independently with PARI
//! (scripts/freeze_rank_one.py).

use std::collections::BTreeMap;
use std::path::PathBuf;

use heegner_core::numeric::Float;
use heegner_core::pipeline::{analyze_batch, ingest_curves, AnalysisReport, Config, Job};
use serde::Deserialize;

#[derive(Deserialize)]
#[allow(dead_code)]
pub struct OracleRow {
    label: String,
    a: Vec<i64>,
    conductor: u64,
    torsion: u32,
    tamagawa: BTreeMap<String, u32>,
    p: u64,
    d: u64,
    beta: u64,
    class_number: usize,
    y_k_height: String,
    index: u64,
    m0: u32,
    m_max: u32,
    exponent_kolyvagin: i64,
    exponent_improved: i64,
    exponent_bsd: i64,
    generator: Vec<String>,
}

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn oracle() -> Vec<OracleRow> {
    let text = std::fs::read_to_string(data("rank_one_oracle.jsonl")).unwrap();
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

pub fn table_config() -> Config {
    Config { precision_digits: 40, sieve_bound: 10_000, distribution_check: false, ..Config::default() }
}

fn mismatches(r: &AnalysisReport, o: &OracleRow) -> Vec<String> {
    let mut out = Vec::new();
    let mut eq = |what: &str, got: String, want: String| {
        if got != want {
            out.push(format!("{what}: got {got}, want {want}"));
        }
    };
    eq("conductor", r.curve.conductor.clone(), o.conductor.to_string());
    eq("torsion", r.curve.torsion_order.to_string(), o.torsion.to_string());
    eq("beta", r.beta.to_string(), o.beta.to_string());
    eq("class number", r.class_number.to_string(), o.class_number.to_string());
    let tam: BTreeMap<String, u32> = r.local_data.iter().map(|l| (l.q.to_string(), l.tamagawa)).collect();
    eq("tamagawa", format!("{tam:?}"), format!("{:?}", o.tamagawa));
    eq("m0", r.m0.to_string(), o.m0.to_string());
    eq("m_max", r.m_max.to_string(), o.m_max.to_string());
    let b = &r.bounds;
    eq("kolyvagin", b.exponent_kolyvagin.to_string(), o.exponent_kolyvagin.to_string());
    eq("improved", b.exponent_improved.to_string(), o.exponent_improved.to_string());
    eq("bsd", b.exponent_bsd.to_string(), o.exponent_bsd.to_string());
    let k = r.heegner.multiplier as i64;
    // root = k [E(Q) : Z y_K]
    eq("root", r.index.root.clone(), (o.index * k as u64).to_string());
    // the report carries k y_K; compare h(y_K) to about 1e-20
    let h = Float::parse_decimal(r.heegner.height.as_deref().unwrap(), 128).unwrap();
    let want = Float::parse_decimal(&o.y_k_height, 128).unwrap();
    let gap = (&(&h / &Float::from_i64(k * k, 128)) - &want).abs();
    if !gap.abs_below_pow2(-66) {
        out.push(format!("h(y_K): got {h:?}/{k}^2, want {}", o.y_k_height));
    }
    out
}

pub fn run_table() -> (usize, Vec<String>, Vec<AnalysisReport>) {
    let table = ingest_curves(&data("rank_one_curves.jsonl")).unwrap();
    assert!(table.errors.is_empty(), "{:?}", table.errors);
    let rows = oracle();
    let jobs: Vec<Job> = rows.iter().map(|o| Job { label: o.label.clone(), d: o.d, p: o.p }).collect();
    let results = analyze_batch(&table, &jobs, &table_config());
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for (o, res) in rows.iter().zip(results) {
        match res {
            Ok(r) => {
                for m in mismatches(&r, o) {
                    failures.push(format!("{}: {m}", o.label));
                }
                reports.push(r);
            }
            Err(e) => failures.push(format!("{}: {e}", o.label)),
        }
    }
    (rows.len(), failures, reports)
}
