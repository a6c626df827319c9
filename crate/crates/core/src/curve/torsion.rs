//! Rational torsion by Lutz-Nagell on the short model
//! `Y^2 = X^3 - 27 c4 X - 54 c6`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{EllipticCurve, RationalPoint};
use crate::numeric::factor;

/// Integer roots of the monic cubic `X^3 + a X + b`.
fn integer_roots_depressed_cubic(a: &BigInt, b: &BigInt) -> Vec<BigInt> {
    let f = |x: &BigInt| x * x * x + a * x + b;
    // all real roots lie in [-R, R] with R = 1 + max(|a|, |b|)
    let bound = BigInt::one() + a.abs().max(b.abs());
    // monotone pieces split at the critical points +-sqrt(-a/3)
    let mut cuts = vec![-bound.clone()];
    if a.is_negative() {
        let c: BigInt = num_integer::Roots::sqrt(&(-a / BigInt::from(3)));
        cuts.push(-&c - 1);
        cuts.push(-&c + 1);
        cuts.push(&c - 1);
        cuts.push(&c + 1);
    }
    cuts.push(bound);
    cuts.sort();
    let mut roots: Vec<BigInt> = Vec::new();
    let check = |x: BigInt, roots: &mut Vec<BigInt>| {
        if f(&x).is_zero() && !roots.contains(&x) {
            roots.push(x);
        }
    };
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0].clone(), w[1].clone());
        check(lo.clone(), &mut roots);
        check(hi.clone(), &mut roots);
        let flo = f(&lo).signum();
        let fhi = f(&hi).signum();
        if flo == fhi || flo.is_zero() || fhi.is_zero() {
            // the neighborhoods of critical points are checked directly
            let mut x = lo.clone();
            if &hi - &lo <= BigInt::from(4) {
                while x <= hi {
                    check(x.clone(), &mut roots);
                    x += 1;
                }
            }
            continue;
        }
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
            let fm = f(&mid);
            if fm.is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if fm.signum() == flo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        check(lo, &mut roots);
        check(hi, &mut roots);
    }
    roots.sort();
    roots
}

fn divisors_with_square_dividing(n: &BigInt) -> Vec<BigInt> {
    // all y >= 1 with y^2 | n
    let mut ys = vec![BigInt::one()];
    for (p, e) in factor(n) {
        let p = BigInt::from(p);
        let mut next = Vec::new();
        for y in &ys {
            let mut pk = BigInt::one();
            for _ in 0..=(e / 2) {
                next.push(y * &pk);
                pk *= &p;
            }
        }
        ys = next;
    }
    ys.sort();
    ys
}

impl EllipticCurve {
    /// All rational torsion points, including infinity first.
    pub fn torsion_points(&self) -> Vec<RationalPoint> {
        let inv = self.invariants();
        let a = &inv.c4 * -27;
        let b = &inv.c6 * -54;
        let disc: BigInt = &a * &a * &a * 4 + &b * &b * 27;
        let disc = disc.abs();
        let mut candidates: Vec<RationalPoint> = Vec::new();
        let mut ys = vec![BigInt::zero()];
        ys.extend(divisors_with_square_dividing(&disc));
        for y in ys {
            let y2 = &y * &y;
            for x in integer_roots_depressed_cubic(&a, &(&b - &y2)) {
                for yy in [y.clone(), -y.clone()] {
                    let short = RationalPoint::Affine {
                        x: BigRational::from_integer(x.clone()),
                        y: BigRational::from_integer(yy.clone()),
                    };
                    let p = self.from_short(&short);
                    if !candidates.contains(&p) {
                        candidates.push(p);
                    }
                    if y.is_zero() {
                        break;
                    }
                }
            }
        }
        let mut out = vec![RationalPoint::Infinity];
        for p in candidates {
            debug_assert!(self.contains(&p));
            if self.torsion_order_of(&p).is_some() {
                out.push(p);
            }
        }
        out
    }

    pub fn torsion_order(&self) -> u32 {
        self.torsion_points().len() as u32
    }
}
