use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use heegner_core::curve::{EllipticCurve, RationalPoint};
use heegner_core::finite::chi_ell;
use heegner_core::galois::mod_p_image_surjective;
use heegner_core::heegner::{heegner_point, verify_distribution, HeegnerSetup};
use heegner_core::kolyvagin::{find_kolyvagin_primes, sha_bounds};
use heegner_core::pipeline::{
    analyze, analyze_batch, emit_report, ingest_curves, parse_curves, with_generator, Config, CurveRecord, Job,
    PipelineError, ReportFormat,
};
use heegner_core::selmer::{exhaustive_pm3, replay_trials, run_lab};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "heegner-bound", version, about = "Heegner points and Shafarevich-Tate bounds for rank-one curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full analysis of one (curve, D, p); writes a report under --out.
    Analyze(AnalyzeArgs),
    /// Kolyvagin primes up to a bound.
    Sieve {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short = 'D')]
        d: u64,
        #[arg(short)]
        p: u64,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
    },
    /// The three exponents from m0 and the Tamagawa numbers.
    Bounds {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short)]
        p: u64,
        #[arg(long)]
        m0: u32,
    },
    /// Compute and recognize y_K.
    HeegnerPoint {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short = 'D')]
        d: u64,
        #[arg(long, default_value_t = 60)]
        precision: u32,
        #[arg(long, default_value_t = 400_000)]
        max_terms: usize,
        /// Allow D = 3, 4.
        #[arg(long)]
        allow_extra_units: bool,
    },
    /// Check the trace relation between levels l and 1 for inert l.
    VerifyDistribution {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short = 'D')]
        d: u64,
        #[arg(short)]
        l: u64,
        #[arg(long, default_value_t = 60)]
        precision: u32,
        #[arg(long, default_value_t = 4_000_000)]
        max_terms: usize,
    },
    /// Check chi_l on the reduction mod l for every Kolyvagin prime up to --bound.
    ChiEll {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short = 'D')]
        d: u64,
        #[arg(short)]
        p: u64,
        #[arg(long, default_value_t = 200)]
        bound: u64,
    },
    /// One-sided surjectivity test for the mod-p image.
    GaloisImage {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short)]
        p: u64,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Selmer-structure checks on synthetic duality models.
    SelmerLab {
        /// p^m; p^m = 3 with --exhaustive runs the full enumeration.
        #[arg(long, default_value_t = 9)]
        pm: u64,
        #[arg(long, default_value_t = 3)]
        places: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exhaustive: bool,
        /// Core-vertex invariant replays instead of the general checks.
        #[arg(long)]
        replay: bool,
    },
    /// Analyze every job of a JSON-lines file {"label", "d", "p"} in parallel.
    Batch {
        #[arg(long)]
        curve_file: PathBuf,
        #[arg(long)]
        jobs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct CurveArgs {
    /// JSON-lines curve table.
    #[arg(long, requires = "label", conflicts_with = "curve")]
    curve_file: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Coefficients a1,a2,a3,a4,a6 of a minimal model.
    #[arg(long, allow_hyphen_values = true)]
    curve: Option<String>,
}

#[derive(Args)]
struct ConfigArgs {
    /// key = value file; flags below win over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long)]
    qseries_max_terms: Option<usize>,
    #[arg(long)]
    sieve_bound: Option<u64>,
    #[arg(long)]
    search_height_bound: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    allow_unverified_hypothesis: bool,
    #[arg(long)]
    no_distribution_check: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    curve: CurveArgs,
    #[arg(short = 'D')]
    d: u64,
    #[arg(short)]
    p: u64,
    /// x_n/x_d,y_n/y_d; replaces the record's generator.
    #[arg(long, allow_hyphen_values = true)]
    generator: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    #[command(flatten)]
    config: ConfigArgs,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config, PipelineError> {
        let mut c = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(v) = self.precision {
            c.precision_digits = v;
        }
        if let Some(v) = self.qseries_max_terms {
            c.qseries_max_terms = v;
        }
        if let Some(v) = self.sieve_bound {
            c.sieve_bound = v;
        }
        if let Some(v) = self.search_height_bound {
            c.search_height_bound = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.allow_unverified_hypothesis |= self.allow_unverified_hypothesis;
        if self.no_distribution_check {
            c.distribution_check = false;
        }
        Ok(c)
    }
}

fn validation(msg: impl ToString) -> PipelineError {
    PipelineError::Validation(msg.to_string())
}

impl CurveArgs {
    fn record(&self) -> Result<CurveRecord, PipelineError> {
        if let Some(path) = &self.curve_file {
            let label = self.label.as_deref().expect("clap enforces --label");
            return find_record(path, label);
        }
        let Some(a) = &self.curve else {
            return Err(validation("give --curve-file with --label, or --curve a1,a2,a3,a4,a6"));
        };
        let coeffs: Vec<&str> = a.split(',').map(str::trim).collect();
        let line = serde_json::json!({ "label": self.label.as_deref().unwrap_or("E"), "a": coeffs }).to_string();
        let mut parsed = parse_curves(&line);
        match parsed.errors.pop() {
            Some(e) => Err(validation(format!("--curve: {}", e.message))),
            None => Ok(parsed.records.remove(0)),
        }
    }

    fn curve(&self) -> Result<EllipticCurve, PipelineError> {
        self.record()?.curve()
    }
}

fn find_record(path: &Path, label: &str) -> Result<CurveRecord, PipelineError> {
    let table = ingest_curves(path)?;
    for e in &table.errors {
        eprintln!("{}:{}: {}", path.display(), e.line, e.message);
    }
    table.find(label).cloned().ok_or_else(|| validation(format!("no curve labelled {label:?} in {}", path.display())))
}

fn print_json<T: Serialize>(v: &T) {
    use std::io::Write;
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cmd: Cmd) -> Result<(), PipelineError> {
    let comp = |e: &dyn std::fmt::Display| PipelineError::Computation(e.to_string());
    match cmd {
        Cmd::Analyze(a) => {
            let config = a.config.resolve()?;
            let mut record = a.curve.record()?;
            if let Some(g) = &a.generator {
                let g = RationalPoint::parse(g).map_err(validation)?;
                record = with_generator(&record, &g)?;
            }
            let t = Instant::now();
            let report = analyze(&record, a.d, a.p, &config)?;
            let path = emit_report(&report, a.format, &a.out)?;
            eprintln!("analysis took {:.2?}", t.elapsed());
            println!("{}", path.display());
        }
        Cmd::Sieve { curve, d, p, bound } => {
            let e = curve.curve()?;
            let primes = find_kolyvagin_primes(&e, d, p, bound).map_err(validation)?;
            print_json(&primes);
        }
        Cmd::Bounds { curve, p, m0 } => {
            let e = curve.curve()?;
            let b = sha_bounds(m0, e.bad_local_data(), p).map_err(|e| comp(&e))?;
            print_json(&b);
        }
        Cmd::HeegnerPoint { curve, d, precision, max_terms, allow_extra_units } => {
            let e = curve.curve()?;
            let setup = HeegnerSetup::new(&e, d, allow_extra_units).map_err(validation)?;
            let t = Instant::now();
            let r = heegner_point(&setup, precision, max_terms).map_err(|e| comp(&e))?;
            eprintln!("y_K took {:.2?}", t.elapsed());
            print_json(&r);
            if !r.is_recognized() {
                return Err(PipelineError::Computation(format!("y_K not recognized: {:?}", r.status)));
            }
        }
        Cmd::VerifyDistribution { curve, d, l, precision, max_terms } => {
            let e = curve.curve()?;
            let setup = HeegnerSetup::new(&e, d, false).map_err(validation)?;
            let t = Instant::now();
            let c = verify_distribution(&setup, l, precision, max_terms).map_err(|e| comp(&e))?;
            eprintln!("distribution check took {:.2?}", t.elapsed());
            print_json(&serde_json::json!({ "check": c, "passed": c.passed() }));
            if !c.passed() {
                return Err(PipelineError::Computation("residual above tolerance".into()));
            }
        }
        Cmd::ChiEll { curve, d, p, bound } => {
            let e = curve.curve()?;
            let primes = find_kolyvagin_primes(&e, d, p, bound).map_err(validation)?;
            let mut reports = Vec::new();
            for kp in primes {
                reports.push(chi_ell(&e, kp.l, p).map_err(|e| comp(&e))?);
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            print_json(&reports);
            if failed > 0 {
                return Err(PipelineError::Computation(format!("{failed} primes failed")));
            }
        }
        Cmd::GaloisImage { curve, p, bound } => {
            let e = curve.curve()?;
            print_json(&mod_p_image_surjective(&e, p, bound).map_err(validation)?);
        }
        Cmd::SelmerLab { pm, places, trials, seed, exhaustive, replay } => {
            let t = Instant::now();
            let ledger = if exhaustive {
                if pm != 3 {
                    return Err(validation("--exhaustive needs --pm 3"));
                }
                exhaustive_pm3()
            } else if replay {
                replay_trials(pm, places, trials, seed)
            } else {
                run_lab(pm, places, trials, seed)
            }
            .map_err(validation)?;
            eprintln!("selmer lab took {:.2?}", t.elapsed());
            print_json(&ledger);
            if !ledger.pass {
                return Err(PipelineError::Computation("some checks failed".into()));
            }
        }
        Cmd::Batch { curve_file, jobs, out, format, config } => {
            let config = config.resolve()?;
            let table = ingest_curves(&curve_file)?;
            for e in &table.errors {
                eprintln!("{}:{}: {}", curve_file.display(), e.line, e.message);
            }
            let text = std::fs::read_to_string(&jobs).map_err(|e| PipelineError::io(&jobs, e))?;
            let mut list = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let t = line.trim();
                if t.is_empty() || t.starts_with('#') {
                    continue;
                }
                list.push(
                    serde_json::from_str::<Job>(t)
                        .map_err(|e| validation(format!("{}:{}: {e}", jobs.display(), i + 1)))?,
                );
            }
            let t = Instant::now();
            let mut worst = None;
            for (job, res) in list.iter().zip(analyze_batch(&table, &list, &config)) {
                match res.and_then(|r| emit_report(&r, format, &out)) {
                    Ok(path) => println!("{}", path.display()),
                    Err(e) => {
                        eprintln!("{} D={} p={}: {e}", job.label, job.d, job.p);
                        worst = Some(worst.map_or(e.exit_code(), |w: i32| w.max(e.exit_code())));
                    }
                }
            }
            eprintln!("batch of {} took {:.2?}", list.len(), t.elapsed());
            if let Some(code) = worst {
                return Err(match code {
                    4 => PipelineError::HypothesisNotCertified("see above".into()),
                    3 => PipelineError::Computation("see above".into()),
                    _ => validation("see above"),
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
