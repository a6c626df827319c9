use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use heegner_core::curve::{EllipticCurve, RationalPoint};
use heegner_core::finite::chi_ell;
use heegner_core::heegner::{heegner_point, reduced_forms, HeegnerSetup};
use heegner_core::kolyvagin::find_kolyvagin_primes;
use heegner_core::pipeline::{analyze, Config, CurveRecord};
use heegner_core::selmer::run_lab;

fn e37() -> EllipticCurve {
    EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap()
}

fn arithmetic(c: &mut Criterion) {
    let e = e37();
    c.bench_function("trace_of_frobenius l=10007", |b| b.iter(|| e.trace_of_frobenius(black_box(10_007)).unwrap()));
    c.bench_function("reduced_forms disc=-9991", |b| b.iter(|| reduced_forms(black_box(-9991)).unwrap()));
    c.bench_function("canonical_height 37a1 (0,0) 256 bits", |b| {
        let g = RationalPoint::from_i64(0, 0);
        b.iter(|| e.canonical_height(black_box(&g), 256).unwrap())
    });
    c.bench_function("kolyvagin sieve to 1e4", |b| {
        b.iter(|| find_kolyvagin_primes(&e, 7, 3, black_box(10_000)).unwrap())
    });
    c.bench_function("chi_l l=47 p=3", |b| b.iter(|| chi_ell(&e, black_box(47), 3).unwrap()));
}

fn heavy(c: &mut Criterion) {
    let mut g = c.benchmark_group("heavy");
    g.sample_size(10);
    let e = e37();
    let setup = HeegnerSetup::new(&e, 7, false).unwrap();
    g.bench_function("heegner_point 37a1 D=7 40 digits", |b| {
        b.iter(|| heegner_point(&setup, black_box(40), 1 << 20).unwrap())
    });
    let rec: CurveRecord = serde_json::from_str(r#"{"label":"37a1","a":[0,0,1,-1,0]}"#).unwrap();
    let cfg = Config { precision_digits: 40, sieve_bound: 10_000, distribution_check: false, ..Config::default() };
    g.bench_function("analyze 37a1 D=7 p=5", |b| b.iter(|| analyze(&rec, 7, 5, black_box(&cfg)).unwrap()));
    g.bench_function("selmer lab p^m=9 x100", |b| b.iter(|| run_lab(9, 2, black_box(100), 0).unwrap()));
    g.finish();
}

criterion_group!(benches, arithmetic, heavy);
criterion_main!(benches);
