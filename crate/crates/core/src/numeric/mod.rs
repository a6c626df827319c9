//! Exact integer helpers and arbitrary-precision real/complex arithmetic.

mod arith;
mod complex;
mod float;

pub use arith::{
    exact_sqrt, factor, inv_mod, is_fundamental_discriminant, is_prime, is_probable_prime_big, is_squarefree,
    kronecker_symbol, mod_u64, mul_mod, ord_p, ord_p_big, p_valuation, pow_mod, prime_divisors_u64, primes_up_to,
    signum, smallest_prime_factors, sqrt_mod_prime, Valuation,
};
pub use complex::Complex;
pub use float::{digits_to_bits, Float, Precision};

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("modulus must be nonzero")]
    ZeroModulus,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("agm requires positive inputs")]
    NonPositiveAgm,
    #[error("precision {0} below the minimum of 15 digits")]
    PrecisionTooLow(u32),
    #[error("cannot parse decimal literal {0:?}")]
    Parse(String),
}

/// Arithmetic-geometric mean of two positive reals at the smaller of the
/// two precisions.
pub fn agm(a: &Float, b: &Float) -> Result<Float, NumericError> {
    agm_trace(a, b).map(|(m, _)| m)
}

/// AGM together with the successive gaps `|a_k - b_k|`, for diagnostics.
pub fn agm_trace(a: &Float, b: &Float) -> Result<(Float, Vec<Float>), NumericError> {
    if !a.is_positive() || !b.is_positive() {
        return Err(NumericError::NonPositiveAgm);
    }
    let prec = a.prec().min(b.prec());
    let mut a = a.with_prec(prec + 8);
    let mut b = b.with_prec(prec + 8);
    let mut gaps = Vec::new();
    loop {
        let gap = (&a - &b).abs();
        let done = gap.is_zero() || gap.top_exponent() < a.top_exponent() - prec as i64 - 4;
        gaps.push(gap);
        if done || gaps.len() > 10_000 {
            break;
        }
        let an = (&a + &b).mul_pow2(-1);
        b = (&a * &b).sqrt();
        a = an;
    }
    Ok((a.with_prec(prec), gaps))
}

/// Continued-fraction convergents of a real number, stopping once a
/// denominator exceeds `max_den`.
pub fn convergents(x: &Float, max_den: &BigInt) -> Vec<BigRational> {
    use num_traits::{One, Zero};
    let prec = x.prec();
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    for _ in 0..(prec as usize) {
        let a = r.floor();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if &k2 > max_den {
            break;
        }
        out.push(BigRational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &r - &Float::from_bigint(&a, prec);
        if frac.is_zero() || frac.top_exponent() < -(prec as i64) + 16 {
            break;
        }
        r = frac.recip();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agm_values() {
        let p = Precision::new(40).unwrap().bits();
        let one = Float::one(p);
        let r2 = Float::from_i64(2, p).sqrt();
        let m = agm(&one, &r2).unwrap();
        assert_eq!(m.to_decimal_string(16), "1.198140234735592");
        assert_eq!(agm(&r2, &one).unwrap(), m);
        assert_eq!(agm(&r2, &r2).unwrap(), r2);
        assert!(agm(&one, &Float::zero(p)).is_err());
        assert!(agm(&-&one, &one).is_err());
    }

    #[test]
    fn convergents_of_rational() {
        let x = Float::from_ratio(&BigInt::from(355), &BigInt::from(113), 200);
        let c = convergents(&x, &BigInt::from(1000));
        assert_eq!(c.last().unwrap(), &BigRational::new(355.into(), 113.into()));
    }
}
