//! Affine point arithmetic on the reduction of a curve modulo a good prime.

use num_traits::Zero;

use super::{EllipticCurve, RationalPoint};
use crate::numeric::{mod_u64, mul_mod, pow_mod};

/// The reduction `E~/F_l` with `l` an odd or even good prime.
#[derive(Clone, Debug)]
pub struct ModPointCurve {
    pub l: u64,
    pub a: [u64; 5],
}

/// `None` is the point at infinity.
pub type ModPoint = Option<(u64, u64)>;

impl ModPointCurve {
    pub fn new(e: &EllipticCurve, l: u64) -> ModPointCurve {
        ModPointCurve { l, a: e.a_mod(l) }
    }

    fn inv(&self, v: u64) -> u64 {
        pow_mod(v, self.l - 2, self.l)
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.l - b % self.l) % self.l
    }

    pub fn contains(&self, p: ModPoint) -> bool {
        let Some((x, y)) = p else { return true };
        let l = self.l;
        let [a1, a2, a3, a4, a6] = self.a;
        let lhs = (mul_mod(y, y, l) + mul_mod(mul_mod(a1, x, l), y, l) + mul_mod(a3, y, l)) % l;
        let x2 = mul_mod(x, x, l);
        let rhs = (mul_mod(x2, x, l) + mul_mod(a2, x2, l) + mul_mod(a4, x, l) + a6) % l;
        lhs == rhs
    }

    pub fn neg(&self, p: ModPoint) -> ModPoint {
        let (x, y) = p?;
        let [a1, _, a3, _, _] = self.a;
        let l = self.l;
        Some((x, self.sub(self.sub(l - y % l, mul_mod(a1, x, l)), a3)))
    }

    pub fn add(&self, p: ModPoint, q: ModPoint) -> ModPoint {
        let Some((x1, y1)) = p else { return q };
        let Some((x2, y2)) = q else { return p };
        let l = self.l;
        let [a1, a2, a3, a4, a6] = self.a;
        let (lam, nu) = if x1 == x2 {
            let den = (2 * y1 % l + mul_mod(a1, x1, l) + a3) % l;
            if y1 != y2 || den == 0 {
                return None;
            }
            let x1s = mul_mod(x1, x1, l);
            let num = self.sub((3 * x1s % l + mul_mod(2 * a2 % l, x1, l) + a4) % l, mul_mod(a1, y1, l));
            let nnum =
                self.sub((self.sub(mul_mod(a4, x1, l), mul_mod(x1s, x1, l)) + 2 * a6 % l) % l, mul_mod(a3, y1, l));
            let di = self.inv(den);
            (mul_mod(num, di, l), mul_mod(nnum, di, l))
        } else {
            let di = self.inv(self.sub(x2, x1));
            let lam = mul_mod(self.sub(y2, y1), di, l);
            let nu = mul_mod(self.sub(mul_mod(y1, x2, l), mul_mod(y2, x1, l)), di, l);
            (lam, nu)
        };
        let x3 = self.sub(self.sub(self.sub((mul_mod(lam, lam, l) + mul_mod(a1, lam, l)) % l, a2), x1), x2);
        let y3 = self.sub(self.sub(l - mul_mod((lam + a1) % l, x3, l) % l, nu), a3);
        Some((x3, y3 % l))
    }

    pub fn mul(&self, p: ModPoint, k: u64) -> ModPoint {
        let mut acc = None;
        let mut base = p;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Reduce a rational point; points with `l` in a denominator map to infinity.
    pub fn reduce(&self, p: &RationalPoint) -> ModPoint {
        let RationalPoint::Affine { x, y } = p else { return None };
        let lb = num_bigint::BigInt::from(self.l);
        if (x.denom() % &lb).is_zero() || (y.denom() % &lb).is_zero() {
            return None;
        }
        let r = |n: &num_bigint::BigInt, d: &num_bigint::BigInt| -> u64 {
            let dn = mod_u64(d, self.l);
            mul_mod(mod_u64(n, self.l), self.inv(dn), self.l)
        };
        Some((r(x.numer(), x.denom()), r(y.numer(), y.denom())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_a_homomorphism() {
        let e = EllipticCurve::from_i64([0, 0, 1, -1, 0], None).unwrap();
        let p = RationalPoint::from_i64(0, 0);
        for l in [3u64, 5, 7, 11, 101] {
            let m = ModPointCurve::new(&e, l);
            let n = e.count_points(l).unwrap();
            let pr = m.reduce(&p);
            assert!(m.contains(pr));
            assert_eq!(m.mul(pr, n), None);
            for k in 1..8 {
                let exact = m.reduce(&e.mul(&p, k));
                assert_eq!(exact, m.mul(pr, k as u64), "l={l} k={k}");
            }
        }
    }
}
