//! Canonical height as a sum of local heights: Tate's series at the real
//! place and closed forms at the finite places. The normalization is the
//! one with `h(P) ~ log max(|num x|, den x)`, twice the sum of local terms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::analytic::real_two_torsion_f64;
use super::{CurveError, EllipticCurve, RationalPoint, Reduction};
use crate::numeric::{factor, ord_p_big, Float};

/// Local contributions to `h(P)`, already scaled so they sum to the total.
#[derive(Clone, Debug, Serialize)]
pub struct HeightBreakdown {
    pub archimedean: Float,
    /// `(q, contribution)` for every prime with a nonzero term.
    pub finite: Vec<(u64, Float)>,
    pub total: Float,
}

fn rat_to_float(r: &BigRational, prec: u32) -> Float {
    Float::from_rational(r, prec)
}

impl EllipticCurve {
    /// Canonical height of `p` at binary precision `prec`. Exactly zero on
    /// torsion points.
    pub fn canonical_height(&self, p: &RationalPoint, prec: u32) -> Result<Float, CurveError> {
        Ok(self.height_breakdown(p, prec)?.total)
    }

    pub fn height_breakdown(&self, p: &RationalPoint, prec: u32) -> Result<HeightBreakdown, CurveError> {
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve);
        }
        let zero = HeightBreakdown { archimedean: Float::zero(prec), finite: Vec::new(), total: Float::zero(prec) };
        let RationalPoint::Affine { x, y } = p else { return Ok(zero) };
        if self.torsion_order_of(p).is_some() {
            return Ok(zero);
        }
        let w = prec + 32;
        let arch = self.archimedean_lambda(x, w);
        let mut finite: Vec<(u64, Float)> = Vec::new();
        let mut total = arch.clone();
        // 1/2 log den(x) split over the primes of the denominator
        let mut primes: Vec<u64> = Vec::new();
        if !x.denom().is_one() {
            for (q, _) in factor(x.denom()) {
                primes.push(q.to_u64().expect("denominator prime fits in u64"));
            }
        }
        for d in self.bad_local_data() {
            if !primes.contains(&d.q) {
                primes.push(d.q);
            }
        }
        primes.sort_unstable();
        for q in primes {
            let log_q = Float::from_i64(q as i64, w).ln();
            let mut coeff = BigRational::zero();
            let vd = ord_p_big(x.denom(), q);
            if vd > 0 {
                coeff += BigRational::new(BigInt::from(vd), BigInt::from(2));
            }
            if !self.is_good(q) && !self.in_identity_component(p, q) {
                coeff += self.component_correction(x, y, q);
            }
            if !coeff.is_zero() {
                let v = &rat_to_float(&coeff, w) * &log_q;
                total = &total + &v;
                finite.push((q, v.mul_pow2(1).with_prec(prec)));
            }
        }
        Ok(HeightBreakdown {
            archimedean: arch.mul_pow2(1).with_prec(prec),
            finite,
            total: total.mul_pow2(1).with_prec(prec),
        })
    }

    /// Coefficient of `log q` in the local height at a bad prime for a
    /// point off the identity component (the point is `q`-integral there).
    fn component_correction(&self, x: &BigRational, y: &BigRational, q: u64) -> BigRational {
        let inv = self.invariants();
        let [a1, _, a3, _, _] = self.a();
        let qi = |n: &BigInt| BigRational::from_integer(n.clone());
        let psi2 = y * BigInt::from(2) + x * a1 + qi(a3);
        let psi3 = x * x * x * x * BigInt::from(3)
            + x * x * x * &inv.b2
            + x * x * (&inv.b4 * 3)
            + x * (&inv.b6 * 3)
            + qi(&inv.b8);
        let v = |r: &BigRational| -> Option<u32> {
            if r.is_zero() {
                None
            } else {
                Some(ord_p_big(r.numer(), q))
            }
        };
        let data = self.local_data(q).expect("prime");
        match data.reduction {
            Reduction::SplitMultiplicative | Reduction::NonsplitMultiplicative => {
                let n = data.disc_valuation as i64;
                let m = match v(&psi2) {
                    Some(m) => (m as i64).min(n / 2),
                    None => n / 2,
                };
                -BigRational::new(BigInt::from(m * (n - m)), BigInt::from(2 * n))
            }
            Reduction::Additive => {
                let v2 = v(&psi2);
                let v3 = v(&psi3);
                match (v2, v3) {
                    (Some(a), Some(b)) if b < 3 * a => -BigRational::new(BigInt::from(b), BigInt::from(8)),
                    (Some(a), _) => -BigRational::new(BigInt::from(a), BigInt::from(3)),
                    (None, Some(b)) => -BigRational::new(BigInt::from(b), BigInt::from(8)),
                    (None, None) => unreachable!("psi2 and psi3 cannot both vanish"),
                }
            }
            Reduction::Good => BigRational::zero(),
        }
    }

    /// Real local height `1/2 log|x| + 1/8 sum 4^-n log|z_n|` on the model
    /// translated by an integer so that `x >= 2` on `E(R)`.
    fn archimedean_lambda(&self, x: &BigRational, w: u32) -> Float {
        let inv = self.invariants();
        let emin = real_two_torsion_f64(self)[0];
        let r = BigInt::from(emin.floor() as i64 - 2);
        let (b2, b4, b6, b8) = (&inv.b2, &inv.b4, &inv.b6, &inv.b8);
        let r2 = &r * &r;
        let r3 = &r2 * &r;
        let b2s = b2 + &r * 12;
        let b4s = b4 + &r * b2 + &r2 * 6;
        let b6s = b6 + &r * b4 * 2 + &r2 * b2 + &r3 * 4;
        let b8s = b8 + &r * b6 * 3 + &r2 * b4 * 3 + &r3 * b2 + &r3 * &r * 3;
        let f = |v: &BigInt| Float::from_bigint(v, w);
        let (b2f, b4f, b6f, b8f) = (f(&b2s), f(&b4s), f(&b6s), f(&b8s));
        let xs = rat_to_float(&(x - BigRational::from_integer(r)), w);
        debug_assert!(xs.is_positive());
        let mut t = xs.recip();
        let mut lam = xs.ln().mul_pow2(-1);
        let one = Float::one(w);
        let steps = w / 2 + 10;
        let mut scale = Float::one(w).mul_pow2(-3);
        for _ in 0..steps {
            let t2 = t.square();
            let t3 = &t2 * &t;
            let t4 = t2.square();
            let ww = &(&(&t.mul_i64(4) + &(&b2f * &t2)) + &(&b4f * &t3).mul_i64(2)) + &(&b6f * &t4);
            let z = &(&(&one - &(&b4f * &t2)) - &(&b6f * &t3).mul_i64(2)) - &(&b8f * &t4);
            lam = &lam + &(&scale * &z.abs().ln());
            t = &ww / &z;
            scale = scale.mul_pow2(-2);
        }
        lam
    }

    /// `<P, Q> = (h(P + Q) - h(P) - h(Q)) / 2`.
    pub fn height_pairing(&self, p: &RationalPoint, q: &RationalPoint, prec: u32) -> Result<Float, CurveError> {
        let s = self.canonical_height(&self.add(p, q), prec)?;
        let a = self.canonical_height(p, prec)?;
        let b = self.canonical_height(q, prec)?;
        Ok((&(&s - &a) - &b).mul_pow2(-1))
    }
}

/// `h(x) = log max(|num x|, den x)`.
pub fn naive_height(x: &BigRational, prec: u32) -> Float {
    let n = x.numer().abs();
    let d = x.denom().clone();
    Float::from_bigint(if n > d { &n } else { &d }, prec).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{analytic_local_height, periods};

    fn curve(a: [i64; 5]) -> EllipticCurve {
        EllipticCurve::from_i64(a, None).unwrap()
    }

    #[test]
    fn height_37a1() {
        let e = curve([0, 0, 1, -1, 0]);
        let h = e.canonical_height(&RationalPoint::from_i64(0, 0), 128).unwrap();
        assert_eq!(h.to_decimal_string(15), "0.0511114082399688");
    }

    #[test]
    fn zero_on_torsion() {
        let e = curve([0, -1, 1, -10, -20]);
        for p in e.torsion_points() {
            assert!(e.canonical_height(&p, 64).unwrap().is_zero());
        }
    }

    #[test]
    fn quadratic_in_multiples() {
        let e = curve([0, 0, 1, -1, 0]);
        let p = RationalPoint::from_i64(0, 0);
        let prec = 160;
        let h1 = e.canonical_height(&p, prec).unwrap();
        for k in [2i64, 3, 5, 7] {
            let hk = e.canonical_height(&e.mul(&p, k), prec).unwrap();
            let d = &hk - &h1.mul_i64(k * k);
            assert!(d.abs_below_pow2(-120), "k={k} {d:?}");
        }
    }

    #[test]
    fn naive_limit_agrees() {
        // h(2^n P) / 4^n converges to the canonical height
        let e = curve([0, 0, 1, -1, 0]);
        let mut p = RationalPoint::from_i64(0, 0);
        for _ in 0..7 {
            p = e.double(&p);
        }
        let approx = naive_height(p.x().unwrap(), 128).div_i64(4i64.pow(7));
        let h = e.canonical_height(&RationalPoint::from_i64(0, 0), 128).unwrap();
        assert!((&approx - &h).abs_below_pow2(-8));
    }

    #[test]
    fn tate_series_matches_q_series() {
        // real local height two ways: Tate's series at x(z) and the q-product at z
        let e = curve([0, 0, 1, -1, 0]);
        let prec = 160;
        let per = periods(&e, prec);
        let z = crate::numeric::Complex::from_real(Float::parse_decimal("0.7", prec).unwrap());
        // the second real component sits at w2 / 2
        let z2 = &z + &per.w2.mul_pow2(-1);
        for z in [z, z2] {
            let (x, _) = crate::curve::weierstrass_point(&e, &per, &z);
            assert!(x.im.abs_below_pow2(-100));
            let lam_q = analytic_local_height(&e, &per, &z);
            let lam_t = e.archimedean_lambda(&x.re.to_rational(), prec + 32);
            assert!((&lam_q - &lam_t).abs_below_pow2(-100), "{lam_q:?} vs {lam_t:?}");
        }
    }
}
