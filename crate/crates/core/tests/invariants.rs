//! Property tests for algebraic invariants that hold for every input.

use heegner_core::curve::{EllipticCurve, Kodaira, LocalData, RationalPoint, Reduction};
use heegner_core::heegner::QuadForm;
use heegner_core::kolyvagin::sha_bounds;
use heegner_core::numeric::{is_prime, kronecker_symbol, p_valuation, Float, Valuation};
use heegner_core::pipeline::Config;
use heegner_core::selmer::{brute_invariants, enumerate_span, Submodule, Zpm};
use num_bigint::BigInt;
use proptest::prelude::*;

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])
}

fn good_prime_for(e: &EllipticCurve, lo: u64, hi: u64) -> Vec<u64> {
    (lo..hi).filter(|&l| is_prime(l) && e.is_good(l)).collect()
}

fn curve() -> impl Strategy<Value = EllipticCurve> {
    (0i64..2, -1i64..2, 0i64..2, -20i64..21, -20i64..21)
        .prop_filter_map("singular", |(a1, a2, a3, a4, a6)| EllipticCurve::from_i64([a1, a2, a3, a4, a6], None).ok())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn kronecker_is_multiplicative(a in -500i64..500, b in -500i64..500, n in 1i64..500) {
        let ab = kronecker_symbol(a * b, n).unwrap();
        prop_assert_eq!(ab, kronecker_symbol(a, n).unwrap() * kronecker_symbol(b, n).unwrap());
    }

    #[test]
    fn kronecker_bottom_is_multiplicative(a in -500i64..500, m in 1i64..200, n in 1i64..200) {
        let mn = kronecker_symbol(a, m * n).unwrap();
        prop_assert_eq!(mn, kronecker_symbol(a, m).unwrap() * kronecker_symbol(a, n).unwrap());
    }

    #[test]
    fn valuation_is_exact(n in -1_000_000i64..1_000_000, p in small_prime()) {
        match p_valuation(&BigInt::from(n), p).unwrap() {
            Valuation::Infinite => prop_assert_eq!(n, 0),
            Valuation::Finite(v) => {
                let pv = (p as i64).pow(v);
                prop_assert!(n % pv == 0 && n % (pv * p as i64) != 0);
            }
        }
    }

    #[test]
    fn valuation_adds_on_products(a in 1i64..100_000, b in 1i64..100_000, p in small_prime()) {
        let v = |x: i64| p_valuation(&BigInt::from(x), p).unwrap().finite().unwrap();
        prop_assert_eq!(v(a * b), v(a) + v(b));
    }

    #[test]
    fn reduction_keeps_discriminant(a in 1i64..60, b in -60i64..60, c in 1i64..60) {
        let f = QuadForm::new(a, b, c);
        prop_assume!(f.disc() < 0);
        let g = f.reduce();
        prop_assert_eq!(g.disc(), f.disc());
        prop_assert!(g.is_reduced());
        prop_assert_eq!(g.reduce(), g);
        // equivalent forms represent the same minimum
        let min_f = (-30i64..=30).flat_map(|x| (-30i64..=30).map(move |y| (x, y)))
            .filter(|&(x, y)| (x, y) != (0, 0)).map(|(x, y)| f.eval(x, y)).min().unwrap();
        prop_assert_eq!(g.a as i128, min_f);
    }

    #[test]
    fn hasse_bound(e in curve(), i in 0usize..40) {
        let ls = good_prime_for(&e, 3, 400);
        let l = ls[i % ls.len()];
        let a = e.trace_of_frobenius(l).unwrap();
        prop_assert!((a * a) as u64 <= 4 * l);
    }

    #[test]
    fn twist_flips_traces(e in curve(), d in prop::sample::select(vec![-1i64, 2, -3, 5, -7, -11, 13])) {
        let t = e.quadratic_twist(d).unwrap();
        for l in good_prime_for(&e, 3, 200).into_iter().filter(|&l| t.is_good(l) && d % l as i64 != 0) {
            let chi = kronecker_symbol(d, l as i64).unwrap() as i64;
            prop_assert_eq!(t.trace_of_frobenius(l).unwrap(), chi * e.trace_of_frobenius(l).unwrap());
        }
    }

    #[test]
    fn group_law_on_37a1(m in -6i64..7, n in -6i64..7) {
        let e = EllipticCurve::from_i64([0, 0, 1, -1, 0], None).unwrap();
        let g = RationalPoint::from_i64(0, 0);
        let lhs = e.mul(&g, m + n);
        prop_assert_eq!(&lhs, &e.add(&e.mul(&g, m), &e.mul(&g, n)));
        prop_assert!(e.contains(&lhs));
    }

    #[test]
    fn sha_exponents_are_ordered(
        m_extra in 0u32..4,
        cs in prop::collection::vec((prop::sample::select(vec![2u64, 3, 7, 11, 13, 17, 19]), 1u32..40), 0..4),
        p in prop::sample::select(vec![5u64, 23, 29]),
    ) {
        let mut local: Vec<LocalData> = Vec::new();
        for (q, c) in cs {
            if local.iter().any(|d| d.q == q) {
                continue;
            }
            local.push(LocalData {
                q,
                kodaira: Kodaira::I(c),
                tamagawa: c,
                reduction: Reduction::SplitMultiplicative,
                disc_valuation: c,
                conductor_exponent: 1,
            });
        }
        let ords: Vec<u32> = local.iter().map(|d| p_valuation(&BigInt::from(d.tamagawa), p).unwrap().finite().unwrap()).collect();
        let m_max = ords.iter().copied().max().unwrap_or(0);
        let b = sha_bounds(m_max + m_extra, &local, p).unwrap();
        prop_assert!(b.exponent_improved <= b.exponent_kolyvagin);
        prop_assert_eq!(b.m_max, m_max);
        if b.primes_with_p_dividing_c() <= 1 {
            prop_assert_eq!(b.exponent_improved, b.exponent_bsd);
        } else {
            prop_assert!(b.exponent_bsd < b.exponent_improved);
        }
    }

    #[test]
    fn snf_agrees_with_enumeration(
        pm in prop::sample::select(vec![3u64, 9, 27, 5, 25]),
        rows in prop::collection::vec(prop::collection::vec(0u64..1000, 3), 1..4),
    ) {
        let r = Zpm::from_order(pm).unwrap();
        let a: Vec<Vec<u64>> = rows.iter().map(|row| row.iter().map(|x| x % r.q).collect()).collect();
        let s = Submodule::span(r, 3, &a);
        prop_assert_eq!(s.invariants(), &brute_invariants(&r, &enumerate_span(&r, 3, &a)));
    }

    #[test]
    fn decimal_round_trip(m in -1_000_000_000i64..1_000_000_000, e in -40i32..40) {
        let x = Float::from_f64(m as f64 * 10f64.powi(e), 200);
        let s = x.to_decimal_string(40);
        let y = Float::parse_decimal(&s, 200).unwrap();
        let gap = (&x - &y).abs();
        prop_assert!(x.is_zero() && y.is_zero() || gap.to_f64() <= x.abs().to_f64() * 1e-38, "{} vs {}", s, y.to_decimal_string(40));
    }

    #[test]
    fn config_text_round_trip(
        digits in 1u32..500, terms in 1usize..1_000_000, sieve in 1u64..1_000_000,
        seed in any::<u64>(), allow in any::<bool>(), dist in any::<bool>(),
    ) {
        let text = format!(
            "precision_digits = {digits}\nqseries_max_terms = {terms}\nsieve_bound = {sieve}\n# comment\nseed = {seed}\nallow_unverified_hypothesis = {allow}\ndistribution_check = {dist}\n"
        );
        let c = Config::parse(&text).unwrap();
        prop_assert_eq!((c.precision_digits, c.qseries_max_terms, c.sieve_bound, c.seed), (digits, terms, sieve, seed));
        prop_assert_eq!((c.allow_unverified_hypothesis, c.distribution_check), (allow, dist));
    }
}
