//! Kolyvagin primes, square-free conductors built from them, the derivative
//! operators in `Z[Z/(l+1)]`, orders of the classes `kappa_{c,m}`, and the
//! three Shafarevich-Tate exponents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{EllipticCurve, LocalData};
use crate::finite::kolyvagin_m;
use crate::numeric::{is_prime, kronecker_symbol, ord_p, primes_up_to, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KolyvaginError {
    #[error("p = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("p = {0} divides the conductor")]
    DividesConductor(u64),
    #[error("m = {m} exceeds M(c) = {big_m}")]
    BeyondM { m: u32, big_m: Valuation },
    #[error("improved exponent 2 m0 - 2 m_max = {0} is negative")]
    NegativeImproved(i64),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KolyvaginPrime {
    pub l: u64,
    pub a_l: i64,
    /// `ord_p gcd(a_l, l + 1)`.
    pub m: u32,
}

/// Inert in `Q(sqrt -D)`, coprime to `N D p`, `l = -1 mod p`.
fn candidate(e: &EllipticCurve, d: u64, p: u64, l: u64) -> bool {
    l != p && e.is_good(l) && d % l != 0 && (l + 1) % p == 0 && kronecker_symbol(-(d as i64), l as i64) == Ok(-1)
}

/// All Kolyvagin primes `l <= bound`, ascending.
pub fn find_kolyvagin_primes(
    e: &EllipticCurve,
    d: u64,
    p: u64,
    bound: u64,
) -> Result<Vec<KolyvaginPrime>, KolyvaginError> {
    if p == 2 || !is_prime(p) {
        return Err(KolyvaginError::BadPrime(p));
    }
    let cands: Vec<u64> = primes_up_to(bound).into_iter().filter(|&l| candidate(e, d, p, l)).collect();
    let found: Vec<Option<KolyvaginPrime>> = cands
        .par_iter()
        .map(|&l| {
            let a = e.trace_of_frobenius(l).expect("good prime");
            kolyvagin_m(a, l, p).ok().map(|m| KolyvaginPrime { l, a_l: a, m })
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// A square-free product of Kolyvagin primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conductor {
    pub primes: Vec<KolyvaginPrime>,
    pub c: BigInt,
    /// Number of prime factors.
    pub f_c: usize,
    /// `min M(l)`; infinite for `c = 1`.
    pub big_m: Valuation,
}

impl Conductor {
    pub fn unit() -> Conductor {
        Conductor { primes: Vec::new(), c: BigInt::from(1), f_c: 0, big_m: Valuation::Infinite }
    }

    pub fn from_primes(primes: &[KolyvaginPrime]) -> Conductor {
        let mut ps = primes.to_vec();
        ps.sort();
        let c = ps.iter().fold(BigInt::from(1), |acc, q| acc * q.l);
        let big_m = ps.iter().map(|q| Valuation::Finite(q.m)).min().unwrap_or(Valuation::Infinite);
        Conductor { f_c: ps.len(), primes: ps, c, big_m }
    }

    pub fn times(&self, l: &KolyvaginPrime) -> Conductor {
        let mut ps = self.primes.clone();
        ps.push(*l);
        Conductor::from_primes(&ps)
    }
}

/// All `r`-element subsets with `min M >= m`, in lexicographic order of the
/// input positions. `r = 0` gives the unit conductor.
pub fn enumerate_conductors(primes: &[KolyvaginPrime], r: usize, m: u32) -> Vec<Conductor> {
    let eligible: Vec<KolyvaginPrime> = primes.iter().copied().filter(|q| q.m >= m).collect();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(r);
    fn rec(el: &[KolyvaginPrime], start: usize, r: usize, pick: &mut Vec<KolyvaginPrime>, out: &mut Vec<Conductor>) {
        if pick.len() == r {
            out.push(Conductor::from_primes(pick));
            return;
        }
        for i in start..el.len() {
            if el.len() - i < r - pick.len() {
                break;
            }
            pick.push(el[i]);
            rec(el, i + 1, r, pick, out);
            pick.pop();
        }
    }
    rec(&eligible, 0, r, &mut pick, &mut out);
    out
}

/// `eps(c) = eps (-1)^{f_c}`.
pub fn epsilon_sign(eps: i32, c: &Conductor) -> Result<i32, KolyvaginError> {
    if eps != 1 && eps != -1 {
        return Err(KolyvaginError::BadSign(eps));
    }
    Ok(if c.f_c % 2 == 0 { eps } else { -eps })
}

/// `D_l = sum_{i=1}^{l} i sigma^i` as coefficients of `1, sigma, ..., sigma^l`.
pub fn derivative_operator(l: u64) -> Vec<i64> {
    (0..=l as i64).collect()
}

/// Product in `Z[Z/n]`.
pub fn group_ring_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut out = vec![0i64; n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[(i + j) % n] += x * y;
        }
    }
    out
}

/// `(sigma - 1) D_l = (l + 1) - Tr` in `Z[Z/(l+1)]`.
pub fn derivative_identity_holds(l: u64) -> bool {
    let n = l as usize + 1;
    let mut sigma_minus_one = vec![0i64; n];
    sigma_minus_one[0] -= 1;
    sigma_minus_one[1 % n] += 1;
    let lhs = group_ring_mul(&sigma_minus_one, &derivative_operator(l));
    let mut rhs = vec![-1i64; n];
    rhs[0] += n as i64;
    lhs == rhs
}

/// `ord kappa_{c,m} = max(m - m(c), 0)`, defined for `m <= M(c)`.
pub fn kappa_order(m: u32, m_c: Valuation, big_m_c: Valuation) -> Result<u32, KolyvaginError> {
    if Valuation::Finite(m) > big_m_c {
        return Err(KolyvaginError::BeyondM { m, big_m: big_m_c });
    }
    Ok(match m_c {
        Valuation::Infinite => 0,
        Valuation::Finite(mc) => m.saturating_sub(mc),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: u64,
    pub m0: u32,
    /// `q -> ord_p(c_q)` over the bad primes.
    pub tamagawa_valuations: BTreeMap<u64, u32>,
    pub m_max: u32,
    pub exponent_kolyvagin: i64,
    pub exponent_improved: i64,
    pub exponent_bsd: i64,
    /// Lower bound for `m_inf`.
    pub m_infinity_lower: u32,
}

impl BoundReport {
    /// Number of bad primes `q` with `p | c_q`.
    pub fn primes_with_p_dividing_c(&self) -> usize {
        self.tamagawa_valuations.values().filter(|&&v| v > 0).count()
    }

    /// `p^exponent_improved`.
    pub fn improved_bound(&self) -> BigInt {
        BigInt::from(self.p).pow(self.exponent_improved.max(0) as u32)
    }
}

/// Assemble the three exponents from `m_0` and the Tamagawa numbers.
pub fn sha_bounds(m0: u32, local_data: &[LocalData], p: u64) -> Result<BoundReport, KolyvaginError> {
    if p == 2 || !is_prime(p) {
        return Err(KolyvaginError::BadPrime(p));
    }
    let mut vals = BTreeMap::new();
    for d in local_data {
        if d.q == p && d.conductor_exponent > 0 {
            return Err(KolyvaginError::DividesConductor(p));
        }
        if d.conductor_exponent > 0 {
            vals.insert(d.q, ord_p(d.tamagawa as i128, p));
        }
    }
    let m_max = vals.values().copied().max().unwrap_or(0);
    let sum: u32 = vals.values().sum();
    let m0i = m0 as i64;
    let improved = 2 * m0i - 2 * m_max as i64;
    if improved < 0 {
        return Err(KolyvaginError::NegativeImproved(improved));
    }
    Ok(BoundReport {
        p,
        m0,
        tamagawa_valuations: vals,
        m_max,
        exponent_kolyvagin: 2 * m0i,
        exponent_improved: improved,
        exponent_bsd: 2 * (m0i - sum as i64),
        m_infinity_lower: m_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{Kodaira, Reduction};

    fn e37() -> EllipticCurve {
        EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap()
    }

    fn kp(l: u64, m: u32) -> KolyvaginPrime {
        KolyvaginPrime { l, a_l: 0, m }
    }

    fn bad(q: u64, c: u32) -> LocalData {
        LocalData {
            q,
            kodaira: Kodaira::I(c),
            tamagawa: c,
            reduction: Reduction::SplitMultiplicative,
            disc_valuation: c,
            conductor_exponent: 1,
        }
    }

    #[test]
    fn sieve_37a1() {
        let e = e37();
        let ks = find_kolyvagin_primes(&e, 7, 3, 500).unwrap();
        assert_eq!(ks[0], KolyvaginPrime { l: 17, a_l: 0, m: 2 });
        for k in &ks {
            assert_eq!((k.l + 1) % 3, 0);
            assert_eq!(k.a_l % 3, 0);
            assert!(k.l != 37 && k.l != 7 && k.l != 3);
        }
        // independent rescan straight from the definition
        let direct: Vec<u64> = primes_up_to(500)
            .into_iter()
            .filter(|&l| l != 3 && l != 7 && l != 37)
            .filter(|&l| kronecker_symbol(-7, l as i64).unwrap() == -1)
            .filter(|&l| (l + 1) % 3 == 0 && e.ap(l) % 3 == 0)
            .collect();
        assert_eq!(ks.iter().map(|k| k.l).collect::<Vec<_>>(), direct);
        assert!(find_kolyvagin_primes(&e, 7, 2, 100).is_err());
    }

    #[test]
    fn conductors() {
        let ps = [kp(5, 1), kp(11, 2), kp(17, 3)];
        let c0 = enumerate_conductors(&ps, 0, 5);
        assert_eq!(c0, vec![Conductor::unit()]);
        let c2 = enumerate_conductors(&ps, 2, 2);
        assert_eq!(c2.len(), 1);
        assert_eq!(c2[0].c, BigInt::from(187));
        assert_eq!(c2[0].big_m, Valuation::Finite(2));
        assert_eq!(enumerate_conductors(&ps, 2, 1).len(), 3);
        let c = Conductor::unit();
        assert_eq!(epsilon_sign(-1, &c).unwrap(), -1);
        let c1 = c.times(&ps[0]);
        assert_eq!(epsilon_sign(-1, &c1).unwrap(), 1);
        assert_eq!(epsilon_sign(-1, &c1.times(&ps[1])).unwrap(), -1);
        assert!(epsilon_sign(0, &c).is_err());
    }

    #[test]
    fn derivative_operators() {
        assert_eq!(derivative_operator(2), vec![0, 1, 2]);
        for l in 1..200u64 {
            let d = derivative_operator(l);
            assert_eq!(d.iter().sum::<i64>(), (l * (l + 1) / 2) as i64);
            assert!(derivative_identity_holds(l), "{l}");
        }
    }

    #[test]
    fn kappa_orders() {
        let f = Valuation::Finite;
        assert_eq!(kappa_order(2, f(3), f(5)).unwrap(), 0);
        assert_eq!(kappa_order(4, f(0), f(5)).unwrap(), 4);
        assert_eq!(kappa_order(4, Valuation::Infinite, f(5)).unwrap(), 0);
        assert_eq!(kappa_order(4, f(1), f(5)).unwrap(), 3);
        assert!(kappa_order(6, f(1), f(5)).is_err());
        assert_eq!(kappa_order(6, f(1), Valuation::Infinite).unwrap(), 5);
    }

    #[test]
    fn bound_examples() {
        let b = sha_bounds(0, &[bad(37, 1)], 5).unwrap();
        assert_eq!((b.exponent_kolyvagin, b.exponent_improved, b.exponent_bsd), (0, 0, 0));
        let b = sha_bounds(2, &[bad(7, 3), bad(13, 3)], 3).unwrap();
        assert_eq!((b.exponent_kolyvagin, b.exponent_improved, b.exponent_bsd), (4, 2, 0));
        let b = sha_bounds(1, &[bad(7, 3)], 3).unwrap();
        assert_eq!((b.exponent_improved, b.exponent_bsd), (0, 0));
        assert!(matches!(sha_bounds(1, &[bad(3, 1)], 3), Err(KolyvaginError::DividesConductor(3))));
        assert!(matches!(sha_bounds(0, &[bad(7, 3)], 3), Err(KolyvaginError::NegativeImproved(-2))));
    }
}
