//! Frobenius traces by naive point counting and the coefficients `a_n` of
//! the L-series.

use super::{CurveError, EllipticCurve, Reduction};
use crate::numeric::{mod_u64, smallest_prime_factors};

/// `|a| <= 2 sqrt(l)`, exactly.
pub fn hasse_bound_holds(a: i64, l: u64) -> bool {
    (a as i128) * (a as i128) <= 4 * l as i128
}

impl EllipticCurve {
    /// Reduced coefficients `[a1, a2, a3, a4, a6] mod l`.
    pub(crate) fn a_mod(&self, l: u64) -> [u64; 5] {
        let a = self.a();
        [0, 1, 2, 3, 4].map(|i| mod_u64(&a[i], l))
    }

    /// `#E~(F_l)` for a prime `l` of good reduction.
    pub fn count_points(&self, l: u64) -> Result<u64, CurveError> {
        if !crate::numeric::is_prime(l) {
            return Err(crate::numeric::NumericError::NotPrime(l).into());
        }
        if !self.is_good(l) {
            return Err(CurveError::BadPrime(l));
        }
        Ok(count_points_mod(&self.a_mod(l), l))
    }

    /// `a_l = l + 1 - #E~(F_l)` at a good prime.
    pub fn trace_of_frobenius(&self, l: u64) -> Result<i64, CurveError> {
        let n = self.count_points(l)?;
        Ok(l as i64 + 1 - n as i64)
    }

    /// `a_p` at any prime: the trace at good primes and `1, -1, 0` for
    /// split, nonsplit and additive reduction.
    pub fn ap(&self, p: u64) -> i64 {
        match self.local_data(p).map(|d| d.reduction) {
            Ok(Reduction::Good) => self.trace_of_frobenius(p).expect("good prime"),
            Ok(Reduction::SplitMultiplicative) => 1,
            Ok(Reduction::NonsplitMultiplicative) => -1,
            Ok(Reduction::Additive) => 0,
            Err(e) => panic!("ap at non-prime: {e}"),
        }
    }
}

/// Count projective points of `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`
/// over `F_l`.
pub(crate) fn count_points_mod(a: &[u64; 5], l: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = *a;
    if l == 2 {
        let mut n = 1;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        return n;
    }
    // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 =: g(x)
    let lm = l as u128;
    let b2 = ((a1 as u128 * a1 as u128 + 4 * a2 as u128) % lm) as u64;
    let b4 = ((a1 as u128 * a3 as u128 + 2 * a4 as u128) % lm) as u64;
    let b6 = ((a3 as u128 * a3 as u128 + 4 * a6 as u128) % lm) as u64;
    let n = l as usize;
    // quadratic character table: 1 square, 0 zero, -1 nonsquare
    let mut chi = vec![-1i8; n];
    chi[0] = 0;
    let mut sq: u64 = 0;
    let mut odd: u64 = 1;
    for _ in 1..=(l / 2) {
        sq += odd;
        if sq >= l {
            sq -= l;
        }
        odd += 2;
        if odd >= l {
            odd -= l;
        }
        chi[sq as usize] = 1;
    }
    // forward differences of the cubic g at x = 0, 1, 2, ...
    let g = |x: u64| -> u64 {
        let x = x as u128;
        ((4 * x * x % lm * x + b2 as u128 * x % lm * x + 2 * b4 as u128 * x + b6 as u128) % lm) as u64
    };
    let (g0, g1, g2, g3) = (g(0), g(1 % l), g(2 % l), g(3 % l));
    let sub = |a: u64, b: u64| (a + l - b) % l;
    let mut v = g0;
    let mut d1 = sub(g1, g0);
    let mut d2 = sub(sub(g2, g1), sub(g1, g0));
    let d3 = sub(sub(sub(g3, g2), sub(g2, g1)), sub(sub(g2, g1), sub(g1, g0)));
    let mut sum: i64 = 0;
    let step = |a: u64, b: u64| {
        let s = a + b;
        if s >= l {
            s - l
        } else {
            s
        }
    };
    for _ in 0..l {
        sum += chi[v as usize] as i64;
        v = step(v, d1);
        d1 = step(d1, d2);
        d2 = step(d2, d3);
    }
    (l as i64 + 1 + sum) as u64
}

/// Coefficients `a_1..a_n` (index 0 unused and set to 0).
pub fn an_coefficients(e: &EllipticCurve, n: usize) -> Vec<i64> {
    let mut a = vec![0i64; n + 1];
    if n == 0 {
        return a;
    }
    a[1] = 1;
    let spf = smallest_prime_factors(n);
    for m in 2..=n {
        let p = spf[m] as usize;
        if p == m {
            a[p] = e.ap(p as u64);
            // prime powers
            let mut pk = p * p;
            let mut prev = p;
            let mut prev2 = 1;
            let good = e.is_good(p as u64);
            while pk <= n {
                a[pk] = if good { a[p] * a[prev] - p as i64 * a[prev2] } else { a[p] * a[prev] };
                prev2 = prev;
                prev = pk;
                match pk.checked_mul(p) {
                    Some(v) => pk = v,
                    None => break,
                }
            }
            continue;
        }
        // split m = p^k * r with r coprime to p
        let mut r = m;
        let mut pk = 1;
        while r % p == 0 {
            r /= p;
            pk *= p;
        }
        if r > 1 {
            a[m] = a[pk] * a[r];
        }
    }
    a
}
