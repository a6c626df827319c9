//! The modular parametrization `z(tau) = sum a_n / n q^n`, an elliptic
//! logarithm modulo the period lattice.

use super::HeegnerError;
use crate::curve::{an_coefficients, EllipticCurve};
use crate::numeric::{digits_to_bits, Complex, Float};

/// Least `M` with `sum_{n > M} d(n) sqrt(n) |q|^n < 10^-digits`, using
/// `d(n) <= 2 sqrt(n)` and `sum_{n >= K} n r^n <= K r^K / (1 - r)^2`.
pub fn terms_needed(im_tau: f64, digits: u32) -> usize {
    assert!(im_tau > 0.0);
    let log_r = -2.0 * std::f64::consts::PI * im_tau;
    let target = -(digits as f64) * std::f64::consts::LN_10;
    // log of 2 (M + 1) r^(M + 1) / (1 - r)^2, decreasing once M + 1 > -1 / log r
    let tail = |m: usize| {
        let k = (m + 1) as f64;
        (2.0 * k).ln() + k * log_r - 2.0 * (-log_r.exp_m1()).ln()
    };
    let mut lo = (-1.0 / log_r).ceil() as usize;
    if tail(lo) < target {
        return lo.max(1);
    }
    let mut hi = lo.max(1) * 2;
    while tail(hi) >= target {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Cached `a_n` for evaluating the parametrization at many points.
#[derive(Clone, Debug)]
pub struct QExpansion {
    an: Vec<i64>,
}

impl QExpansion {
    pub fn new(e: &EllipticCurve, n_terms: usize) -> QExpansion {
        QExpansion { an: an_coefficients(e, n_terms) }
    }

    pub fn len(&self) -> usize {
        self.an.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.an
    }

    /// `sum_{n <= n_terms} a_n / n q^n` at binary precision `prec`.
    pub fn eval(&self, tau: &Complex, n_terms: usize, prec: u32) -> Complex {
        assert!(n_terms <= self.len(), "expansion too short");
        let w = prec + 16 + usize::BITS - n_terms.leading_zeros();
        let q = tau.with_prec(w).exp_2pi_i();
        let mut qn = Complex::one(w);
        let mut z = Complex::zero(w);
        for n in 1..=n_terms {
            qn = &qn * &q;
            let a = self.an[n];
            if a != 0 {
                z = &z + &qn.scale(&Float::from_i64(a, w).div_i64(n as i64));
            }
        }
        z.with_prec(prec)
    }
}

/// `z(tau)` to `digits` decimal digits with exactly `n_terms` terms, which
/// must satisfy the tail bound.
pub fn modular_param(e: &EllipticCurve, tau: &Complex, digits: u32, n_terms: usize) -> Result<Complex, HeegnerError> {
    if !tau.im.is_positive() {
        return Err(HeegnerError::NotUpperHalfPlane);
    }
    let needed = terms_needed(tau.im.to_f64(), digits);
    if n_terms < needed {
        return Err(HeegnerError::InsufficientTerms { needed, allowed: n_terms });
    }
    Ok(QExpansion::new(e, n_terms).eval(tau, n_terms, digits_to_bits(digits)))
}
