//! Point search by naive height and a p-saturation test for a single point.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{EllipticCurve, ModPointCurve, RationalPoint};
use crate::numeric::{exact_sqrt, is_prime, primes_up_to};

/// Outcome of asking whether `P` is divisible by `p` in `E(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SaturationCheck {
    /// `(#E(F_l) / p) P` is nonzero mod `l` while `p || #E(F_l)`, so `P`
    /// is not in `p E(Q)`.
    Certified { l: u64 },
    /// `P = p Q + T` with `T` torsion.
    Divisible { q: RationalPoint },
    /// Neither a certificate nor a `p`-th root was found.
    Inconclusive,
}

const fn square_mask(m: u32) -> u128 {
    let mut mask = 0u128;
    let mut k = 0;
    while k < m {
        mask |= 1 << ((k * k) % m);
        k += 1;
    }
    mask
}

const SQUARE_MASKS: [(i128, u128); 4] =
    [(64, square_mask(64)), (63, square_mask(63)), (65, square_mask(65)), (11, square_mask(11))];

fn is_square_residue_filter(n: i128) -> bool {
    SQUARE_MASKS.iter().all(|&(m, mask)| (mask >> (n.rem_euclid(m) as u32)) & 1 == 1)
}

fn isqrt_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

impl EllipticCurve {
    /// All affine points with `x = m / e^2`, `|m| <= bound`, `1 <= e <= bound`.
    pub fn points_up_to(&self, bound: u64) -> Vec<RationalPoint> {
        let inv = self.invariants();
        let [a1, _, a3, _, _] = self.a();
        let small = [&inv.b2, &inv.b4, &inv.b6].map(|v| v.to_i128());
        let b = bound as i64;
        let mut out = Vec::new();
        for e in 1..=b {
            let e2 = BigInt::from(e * e);
            for m in -b..=b {
                if m.gcd(&e) != 1 {
                    continue;
                }
                // (2y + a1 x + a3)^2 e^6 = 4m^3 + b2 m^2 e^2 + 2 b4 m e^4 + b6 e^6
                let s = match small {
                    [Some(b2), Some(b4), Some(b6)] if bound <= 1 << 12 => {
                        let (m, ee) = (m as i128, (e * e) as i128);
                        let n = 4 * m * m * m + b2 * m * m * ee + 2 * b4 * m * ee * ee + b6 * ee * ee * ee;
                        if n < 0 || !is_square_residue_filter(n) {
                            continue;
                        }
                        match isqrt_i128(n) {
                            Some(s) => BigInt::from(s),
                            None => continue,
                        }
                    }
                    _ => {
                        let mb = BigInt::from(m);
                        let n = &mb * &mb * &mb * 4
                            + &inv.b2 * &mb * &mb * &e2
                            + &inv.b4 * &mb * &e2 * &e2 * 2
                            + &inv.b6 * &e2 * &e2 * &e2;
                        match exact_sqrt(&n) {
                            Some(s) => s,
                            None => continue,
                        }
                    }
                };
                let x = BigRational::new(BigInt::from(m), e2.clone());
                let e3 = BigInt::from(e * e * e);
                let base = -(&x * a1) - BigRational::from_integer(a3.clone());
                let signs: &[i64] = if s.is_zero() { &[1] } else { &[-1, 1] };
                for &sg in signs {
                    let y = (&base + BigRational::new(&s * sg, e3.clone())) / BigInt::from(2);
                    let p = RationalPoint::Affine { x: x.clone(), y };
                    debug_assert!(self.contains(&p));
                    out.push(p);
                }
            }
        }
        out
    }

    /// Non-torsion point of least canonical height among
    /// [`EllipticCurve::points_up_to`]`(bound)`; ties go to the smaller `x`
    /// and then the smaller `y`.
    pub fn search_generator(&self, bound: u64) -> Option<RationalPoint> {
        let mut best: Option<(f64, RationalPoint)> = None;
        for p in self.points_up_to(bound) {
            if self.torsion_order_of(&p).is_some() {
                continue;
            }
            let h = self.canonical_height(&p, 64).expect("point on curve").to_f64();
            let better = match &best {
                None => true,
                Some((bh, bp)) => {
                    if (h - bh).abs() > 1e-9 * bh.max(1.0) {
                        h < *bh
                    } else {
                        (p.x(), p.y()) < (bp.x(), bp.y())
                    }
                }
            };
            if better {
                best = Some((h, p));
            }
        }
        best.map(|(_, p)| p)
    }

    /// Decide whether `P` lies in `p E(Q) + E(Q)_tors`. Assumes `p` does not
    /// divide the torsion order. First looks for a good prime `l <= l_max`
    /// exactly once divisible by `p` that witnesses non-divisibility, then
    /// searches for a `p`-th root up to the naive height `root_bound`.
    pub fn saturation_check(&self, pt: &RationalPoint, p: u64, l_max: u64, root_bound: u64) -> SaturationCheck {
        assert!(is_prime(p));
        if pt.is_infinity() {
            return SaturationCheck::Divisible { q: RationalPoint::Infinity };
        }
        for l in primes_up_to(l_max) {
            if l == p || !self.is_good(l) || l == 2 {
                continue;
            }
            let n = self.count_points(l).expect("good prime");
            if n % p != 0 || (n / p) % p == 0 {
                continue;
            }
            let m = ModPointCurve::new(self, l);
            if m.mul(m.reduce(pt), n / p).is_some() {
                return SaturationCheck::Certified { l };
            }
        }
        let tors = self.torsion_points();
        for q in self.points_up_to(root_bound) {
            let d = self.add(&self.mul(&q, p as i64), &self.neg(pt));
            if tors.contains(&d) {
                return SaturationCheck::Divisible { q };
            }
        }
        SaturationCheck::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_filter_accepts_squares() {
        for k in 0..5000i128 {
            assert!(is_square_residue_filter(k * k), "{k}");
        }
        let rejected = (0..5000i128).filter(|n| !is_square_residue_filter(*n)).count();
        assert!(rejected > 4000);
    }

    #[test]
    fn generator_search() {
        let e = EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap();
        let g = e.search_generator(10).unwrap();
        assert_eq!(g.x(), Some(&BigRational::from_integer(0.into())));
        assert!(e.search_generator(0).is_none());
        let e = EllipticCurve::from_i64([0, -1, 1, -10, -20], Some("11a1")).unwrap();
        assert!(e.search_generator(20).is_none());
        assert_eq!(e.points_up_to(20).len(), 4);
    }

    #[test]
    fn saturation() {
        let e = EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap();
        let p = RationalPoint::from_i64(0, 0);
        for q in [2u64, 3, 5, 7] {
            assert!(matches!(e.saturation_check(&p, q, 500, 0), SaturationCheck::Certified { .. }), "{q}");
        }
        let p3 = e.mul(&p, 3);
        match e.saturation_check(&p3, 3, 500, 5) {
            SaturationCheck::Divisible { q } => assert_eq!(e.mul(&q, 3), p3),
            other => panic!("{other:?}"),
        }
    }
}
