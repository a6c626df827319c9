//! Acceptance suite: one PASS/FAIL line per criterion, then a single assert.
//!
//! Lines are written straight to stdout so they show up without
//! `--nocapture`.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use heegner_core::curve::{EllipticCurve, Kodaira, RationalPoint, Reduction};
use heegner_core::finite::chi_ell;
use heegner_core::heegner::{reduced_forms, verify_distribution, HeegnerSetup, QuadForm, RecognizedOn, Status};
use heegner_core::kolyvagin::find_kolyvagin_primes;
use heegner_core::numeric::{is_fundamental_discriminant, kronecker_symbol, p_valuation, Float, Valuation};
use heegner_core::pipeline::{analyze, canonical_json, emit_report, ingest_curves, Config, CurveRecord};
use heegner_core::selmer::{exhaustive_pm3, replay_trials, run_lab};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e37() -> EllipticCurve {
    EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap()
}

fn rec37() -> CurveRecord {
    serde_json::from_str(r#"{"label":"37a1","a":[0,0,1,-1,0]}"#).unwrap()
}

fn ord(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn end_to_end_37a1() -> Outcome {
    let cfg = Config { precision_digits: 80, ..Config::default() };
    let t = Instant::now();
    let r = analyze(&rec37(), 7, 5, &cfg).map_err(|e| e.to_string())?;
    let took = t.elapsed();
    ensure!(took < Duration::from_secs(120), "took {took:?}");

    let e = e37();
    let h = &r.heegner;
    ensure!(h.status == Status::Recognized && h.recognized_on == Some(RecognizedOn::Curve), "{h:?}");
    let y = h.point.clone().ok_or("no point")?;
    ensure!(e.contains(&y), "{y} is not on the curve");
    ensure!(e.torsion_order_of(&y).is_none(), "{y} is torsion");

    let ratio = Float::parse_decimal(&r.index.ratio, 128).unwrap();
    let root: BigInt = r.index.root.parse().unwrap();
    let gap = (&ratio - &Float::from_bigint(&(&root * &root), 128)).abs();
    let square = gap.to_f64() < 1e-10;
    ensure!(square, "ratio {} is not a square (root {root})", r.index.ratio);
    ensure!(p_valuation(&root, 5).unwrap() == Valuation::Finite(r.m0), "m0 {} vs root {root}", r.m0);

    let c37 = r.local_data.iter().find(|l| l.q == 37).ok_or("no data at 37")?;
    ensure!(c37.tamagawa == 1 && r.local_data.len() == 1, "{:?}", r.local_data);
    let b = &r.bounds;
    ensure!(b.exponent_improved == b.exponent_kolyvagin && b.exponent_kolyvagin == 2 * r.m0 as i64, "{b:?}");

    // locked on the first verified run
    ensure!(h.multiplier == 2 && y == RationalPoint::from_i64(1, 0), "k = {}, k y_K = {y}", h.multiplier);
    ensure!((r.m0, r.index.root.as_str()) == (0, "2"), "{:?}", r.index);
    ensure!(h.height.as_deref().unwrap().starts_with("0.2044456329598753609435443990"), "{:?}", h.height);
    ensure!(r.generator.point == RationalPoint::from_i64(0, -1), "{}", r.generator.point);
    ensure!(r.generator.height.starts_with("0.05111140823996884023588609975"), "{}", r.generator.height);
    ensure!((b.m_max, b.exponent_bsd, r.m_infinity_lower_bound) == (0, 0, 0), "{b:?}");
    ensure!(r.kolyvagin_primes.first().map(|k| k.l) == Some(19), "{:?}", r.kolyvagin_primes.first());
    let dist = r.distribution.as_ref().ok_or("no distribution check")?;
    ensure!(dist.passed && dist.l == 19, "{dist:?}");

    Ok(format!("k y_K = {y}, ratio {}, m0 = {}, c_37 = 1, exponents all 0, {took:.2?}", &r.index.ratio[..6], r.m0))
}

/// Multiplicative reduction at `q >= 5` by the node's tangent slopes:
/// split iff `-c6` is a square mod `q`; then `c = v` or `gcd(2, v)`.
fn multiplicative_rule(e: &EllipticCurve, q: u64) -> Option<(Reduction, u32, u32)> {
    let inv = e.invariants();
    let qb = BigInt::from(q);
    if !inv.disc.is_multiple_of(&qb) || inv.c4.is_multiple_of(&qb) {
        return None;
    }
    let mut v = 0;
    let mut d = inv.disc.abs();
    while d.is_multiple_of(&qb) {
        d /= &qb;
        v += 1;
    }
    let t = (-&inv.c6).mod_floor(&qb).to_u64().unwrap();
    let split = (1..q).any(|x| x * x % q == t);
    Some(if split {
        (Reduction::SplitMultiplicative, v, v)
    } else {
        (Reduction::NonsplitMultiplicative, v, if v % 2 == 0 { 2 } else { 1 })
    })
}

fn tate_regression() -> Outcome {
    let e11 = EllipticCurve::from_i64([0, -1, 1, -10, -20], Some("11a1")).unwrap();
    let d = e11.local_data(11).unwrap();
    ensure!((d.kodaira, d.tamagawa, d.reduction) == (Kodaira::I(5), 5, Reduction::SplitMultiplicative), "11a1: {d:?}");
    let d = e37().local_data(37).unwrap();
    ensure!(d.kodaira == Kodaira::I(1) && d.tamagawa == 1, "37a1: {d:?}");

    let table = ingest_curves(&common::data("rank_one_curves.jsonl")).map_err(|e| e.to_string())?;
    let mut curves = BTreeSet::new();
    let mut split = 0;
    let mut checked = 0;
    for rec in &table.records {
        let e = rec.curve().map_err(|e| e.to_string())?;
        for q in e.bad_primes().into_iter().filter(|&q| q >= 5) {
            let Some((red, v, c)) = multiplicative_rule(&e, q) else { continue };
            let d = e.local_data(q).unwrap();
            ensure!(
                (d.reduction, d.kodaira, d.tamagawa) == (red, Kodaira::I(v), c),
                "{} at {q}: {d:?}, rule says {red:?} I{v} c={c}",
                rec.label
            );
            curves.insert(rec.label.clone());
            split += (red == Reduction::SplitMultiplicative) as usize;
            checked += 1;
        }
    }
    ensure!(curves.len() >= 3, "only {} curves with multiplicative q >= 5", curves.len());
    ensure!(split > 0 && split < checked, "rule not exercised on both kinds");
    Ok(format!("11a1 I5 split c=5, 37a1 I1 c=1, {checked} multiplicative places on {} ingested curves", curves.len()))
}

fn distribution_relation() -> Outcome {
    let e = e37();
    let l = find_kolyvagin_primes(&e, 7, 3, 1000).map_err(|e| e.to_string())?.first().ok_or("no Kolyvagin prime")?.l;
    let setup = HeegnerSetup::new(&e, 7, false).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let c = verify_distribution(&setup, l, 60, Config::default().qseries_max_terms).map_err(|e| e.to_string())?;
    let took = t.elapsed();
    ensure!(took < Duration::from_secs(600), "took {took:?}");
    let bound = Float::parse_decimal("1e-30", c.residual.prec()).unwrap();
    ensure!(c.residual < bound && c.passed(), "residual {}", c.residual.to_decimal_string(6));
    Ok(format!("l = {l}, a_l = {}, residual {} at 60 digits, {took:.2?}", c.a_l, c.residual.to_decimal_string(3)))
}

fn chi_suite() -> Outcome {
    let e = e37();
    let primes = find_kolyvagin_primes(&e, 7, 3, 200).map_err(|e| e.to_string())?;
    ensure!(!primes.is_empty(), "no Kolyvagin primes up to 200");
    for kp in &primes {
        let r = chi_ell(&e, kp.l, 3).map_err(|err| format!("l = {}: {err}", kp.l))?;
        let want =
            (3u64.pow(ord((kp.l as i64 + 1 - r.a_l) as u64, 3)), 3u64.pow(ord((kp.l as i64 + 1 + r.a_l) as u64, 3)));
        ensure!((r.split.plus_order, r.split.minus_order) == want, "l = {}: {:?} vs {want:?}", kp.l, r.split);
        ensure!(r.passed() && r.exhaustive, "l = {}: {r:?}", kp.l);
    }
    let ls: Vec<u64> = primes.iter().map(|k| k.l).collect();
    Ok(format!("l in {ls:?}, eigenspaces and kernels exact"))
}

fn selmer_lab() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let ex = exhaustive_pm3().map_err(|e| e.to_string())?;
    ensure!(ex.pass, "exhaustive p^m = 3: {:?}", ex.checks);
    ensure!(ex.count("global_duality") > 0 && ex.count("lozenge") > 0, "{:?}", ex.checks.keys());
    parts.push(format!("3: {} checks", ex.checks.values().map(|t| t.total).sum::<u64>()));
    for pm in [9, 27] {
        let led = run_lab(pm, 2, 1000, 7).map_err(|e| e.to_string())?;
        ensure!(led.pass, "p^m = {pm}: {:?}", led.checks);
        ensure!(led.count("global_duality") >= 1000 && led.count("lozenge") >= 1000, "p^m = {pm}: too few trials");
        parts.push(format!("{pm}: 1000 trials"));
    }
    let took = t.elapsed();
    ensure!(took < Duration::from_secs(300), "took {took:?}");
    Ok(format!("{}, {took:.1?}", parts.join(", ")))
}

fn replay() -> Outcome {
    for pm in [3, 9, 27] {
        let led = replay_trials(pm, 2, 100, 11).map_err(|e| e.to_string())?;
        ensure!(led.pass, "p^m = {pm}: {:?}", led.checks);
        ensure!(led.count("replay_core_vertex_invariants") == 100, "p^m = {pm}: {:?}", led.checks);
    }
    Ok("100 core-vertex models each at p^m = 3, 9, 27".into())
}

fn bound_coherence() -> Outcome {
    let (n, failures, reports) = common::run_table();
    ensure!(n >= 20, "only {n} curves");
    ensure!(failures.is_empty(), "{failures:#?}");
    let mut strict = Vec::new();
    for r in &reports {
        let b = &r.bounds;
        ensure!(
            b.exponent_bsd <= b.exponent_improved && b.exponent_improved <= b.exponent_kolyvagin,
            "{}: {b:?}",
            r.curve.label
        );
        if b.primes_with_p_dividing_c() <= 1 {
            ensure!(b.exponent_improved == b.exponent_bsd, "{}: {b:?}", r.curve.label);
        }
        if b.exponent_improved < b.exponent_kolyvagin {
            ensure!(b.primes_with_p_dividing_c() > 0, "{}: strict without p | c_q", r.curve.label);
            strict.push(format!("{} (p={})", r.curve.label, r.p));
        }
    }
    ensure!(!strict.is_empty(), "no strict improvement");
    Ok(format!("{n} curves agree with PARI; strict improvement on {}", strict.join(", ")))
}

fn legendre_by_squares(a: i64, p: i64) -> i32 {
    let a = a.rem_euclid(p);
    if a == 0 {
        0
    } else if (1..p).any(|x| x * x % p == a) {
        1
    } else {
        -1
    }
}

fn kronecker_oracle(a: i64, n: i64) -> i32 {
    let mut s = if n < 0 && a < 0 { -1 } else { 1 };
    let mut m = n.abs();
    let mut q = 2;
    while m > 1 {
        while m % q == 0 {
            m /= q;
            s *= if q == 2 {
                match a.rem_euclid(8) {
                    1 | 7 => 1,
                    3 | 5 => -1,
                    _ => 0,
                }
            } else {
                legendre_by_squares(a, q)
            };
        }
        q += 1;
    }
    s
}

/// Reduce by the textbook steps, independent of the library's loop.
fn reduce_oracle(mut a: i64, mut b: i64, mut c: i64) -> (i64, i64, i64) {
    loop {
        if b > a || b <= -a {
            // translate b into (-a, a]
            let k = (a - b).div_euclid(2 * a);
            c += k * b + k * k * a;
            b += 2 * k * a;
        } else if a > c {
            (a, b, c) = (c, -b, a);
        } else if a == c && b < 0 {
            b = -b;
        } else {
            return (a, b, c);
        }
    }
}

fn oracles() -> Outcome {
    let mut n_checks = 0u64;
    for a in -200..=200 {
        for n in (-200..=200).filter(|&n| n != 0) {
            let got = kronecker_symbol(a, n).map_err(|e| e.to_string())?;
            ensure!(got == kronecker_oracle(a, n), "kronecker({a}, {n}) = {got}");
            n_checks += 1;
        }
    }
    ensure!(kronecker_symbol(5, 0).is_err(), "n = 0 accepted");

    for p in [2u64, 3, 5, 7, 11, 13, 37] {
        for n in -3000i64..=3000 {
            let want = if n == 0 {
                Valuation::Infinite
            } else {
                let mut k = 0;
                while n % (p as i64).pow(k + 1) == 0 {
                    k += 1;
                }
                Valuation::Finite(k)
            };
            ensure!(p_valuation(&BigInt::from(n), p).unwrap() == want, "ord_{p}({n})");
            n_checks += 1;
        }
    }
    ensure!(p_valuation(&BigInt::from(12), 4).is_err(), "p = 4 accepted");

    for d in (3..=200i64).filter(|&d| is_fundamental_discriminant(-d)) {
        let disc = -d;
        let mut classes = BTreeSet::new();
        for a in 1..=d {
            for b in -a..=a {
                let num = b * b - disc;
                if num % (4 * a) == 0 {
                    let c = num / (4 * a);
                    if a.gcd(&b).gcd(&c) == 1 {
                        classes.insert(reduce_oracle(a, b, c));
                    }
                }
            }
        }
        let got: BTreeSet<(i64, i64, i64)> =
            reduced_forms(disc).map_err(|e| e.to_string())?.iter().map(|f: &QuadForm| (f.a, f.b, f.c)).collect();
        ensure!(got == classes, "disc {disc}: {got:?} vs {classes:?}");
        n_checks += 1;
    }

    let curves = [[0, 0, 1, -1, 0], [0, -1, 1, -10, -20], [1, -1, 1, -12, 15], [0, 0, 1, -7, 12], [1, 0, 0, -1, 2]];
    for a in curves {
        let e = EllipticCurve::from_i64(a, None).unwrap();
        for l in (3..300u64).filter(|&l| heegner_core::numeric::is_prime(l) && e.is_good(l)) {
            let am: Vec<i64> = a.iter().map(|&x| x.rem_euclid(l as i64)).collect();
            let l_i = l as i64;
            let mut count = 1i64;
            for x in 0..l_i {
                for y in 0..l_i {
                    let lhs = (y * y + am[0] * x * y + am[2] * y) % l_i;
                    let rhs = (x * x % l_i * x + am[1] * x * x + am[3] * x + am[4]) % l_i;
                    count += (lhs == rhs) as i64;
                }
            }
            let got = e.trace_of_frobenius(l).map_err(|e| e.to_string())?;
            ensure!(got == l_i + 1 - count, "{a:?} at {l}: {got}");
            n_checks += 1;
        }
    }
    Ok(format!("{n_checks} exact comparisons"))
}

fn determinism() -> Outcome {
    let cfg = Config { precision_digits: 60, ..Config::default() };
    let runs: Vec<String> = (0..3)
        .map(|_| analyze(&rec37(), 7, 5, &cfg).map(|r| canonical_json(&r)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure!(runs.iter().all(|r| r == &runs[0]), "reports differ");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = analyze(&rec37(), 7, 5, &cfg).map_err(|e| e.to_string())?;
    let a = emit_report(&report, heegner_core::pipeline::ReportFormat::Json, dir.path()).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&a).unwrap();
    let b = emit_report(&report, heegner_core::pipeline::ReportFormat::Json, dir.path()).map_err(|e| e.to_string())?;
    ensure!(a == b && std::fs::read(&b).unwrap() == bytes, "emitted files differ");
    ensure!(bytes == runs[0].as_bytes(), "emitted bytes differ from the in-memory report");
    Ok(format!("3 runs and 2 emits byte-identical ({} bytes)", bytes.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("end-to-end 37a1, D=7, p=5", end_to_end_37a1),
        ("Tate regression", tate_regression),
        ("distribution relation", distribution_relation),
        ("chi_l suite", chi_suite),
        ("Selmer lab", selmer_lab),
        ("core-vertex replay", replay),
        ("bound coherence over the table", bound_coherence),
        ("oracle equivalence", oracles),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let line = match &outcome {
            Ok(detail) => format!("[PASS] {}. {name}: {detail}\n", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("[FAIL] {}. {name}: {why}\n", i + 1)
            }
        };
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
