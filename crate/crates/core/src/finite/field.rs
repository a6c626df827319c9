//! `F_{l^2} = F_l[t] / (t^2 - s t - r)` with `(s, r) = (0, least nonresidue)`
//! for odd `l` and `t^2 = t + 1` for `l = 2`.

use crate::numeric::{kronecker_symbol, mul_mod, pow_mod, sqrt_mod_prime};

/// An element `a + b t`.
pub type Fe = [u64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fq2 {
    pub l: u64,
    s: u64,
    r: u64,
}

impl Fq2 {
    pub fn new(l: u64) -> Fq2 {
        if l == 2 {
            return Fq2 { l, s: 1, r: 1 };
        }
        let r = (2..l).find(|&r| kronecker_symbol(r as i64, l as i64).unwrap() == -1).expect("odd prime");
        Fq2 { l, s: 0, r }
    }

    /// The modulus `t^2 - s t - r` as `(s, r)`.
    pub fn modulus(&self) -> (u64, u64) {
        (self.s, self.r)
    }

    pub fn zero(&self) -> Fe {
        [0, 0]
    }

    pub fn one(&self) -> Fe {
        [1 % self.l, 0]
    }

    pub fn from_u64(&self, v: u64) -> Fe {
        [v % self.l, 0]
    }

    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        let l = self.l;
        [(x[0] + y[0]) % l, (x[1] + y[1]) % l]
    }

    pub fn neg(&self, x: Fe) -> Fe {
        let l = self.l;
        [(l - x[0]) % l, (l - x[1]) % l]
    }

    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        let l = self.l;
        let bd = mul_mod(x[1], y[1], l);
        let c0 = (mul_mod(x[0], y[0], l) + mul_mod(bd, self.r, l)) % l;
        let c1 = (mul_mod(x[0], y[1], l) + mul_mod(x[1], y[0], l) + mul_mod(bd, self.s, l)) % l;
        [c0, c1]
    }

    pub fn scale(&self, x: Fe, k: u64) -> Fe {
        let l = self.l;
        [mul_mod(x[0], k % l, l), mul_mod(x[1], k % l, l)]
    }

    /// The `l`-power Frobenius, i.e. conjugation `t -> s - t`.
    pub fn frob(&self, x: Fe) -> Fe {
        let l = self.l;
        [(x[0] + mul_mod(x[1], self.s, l)) % l, (l - x[1]) % l]
    }

    pub fn norm(&self, x: Fe) -> u64 {
        let l = self.l;
        let [a, b] = x;
        let t = (mul_mod(a, a, l) + mul_mod(mul_mod(a, b, l), self.s, l)) % l;
        (t + l - mul_mod(mul_mod(b, b, l), self.r, l)) % l
    }

    pub fn inv(&self, x: Fe) -> Fe {
        let n = self.norm(x);
        assert!(n != 0, "inverse of zero");
        let ni = pow_mod(n, self.l - 2, self.l);
        self.scale(self.frob(x), ni)
    }

    pub fn is_zero(&self, x: Fe) -> bool {
        x == [0, 0]
    }

    pub fn pow(&self, x: Fe, mut e: u64) -> Fe {
        let mut acc = self.one();
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// A square root in `F_{l^2}` (odd `l`); every element of `F_l` is a square here.
    pub fn sqrt(&self, x: Fe) -> Option<Fe> {
        let l = self.l;
        assert!(l != 2);
        let [a, b] = x;
        if b == 0 {
            if let Some(c) = sqrt_mod_prime(a, l) {
                return Some([c, 0]);
            }
            // a = r d^2 with d = sqrt(a / r)
            let ar = mul_mod(a, pow_mod(self.r, l - 2, l), l);
            let d = sqrt_mod_prime(ar, l)?;
            return Some([0, d]);
        }
        // (c + d t)^2 = c^2 + r d^2 + 2 c d t
        let n = sqrt_mod_prime(self.norm(x), l)?;
        let half = pow_mod(2, l - 2, l);
        for sgn in [n, (l - n) % l] {
            let c2 = mul_mod((a + sgn) % l, half, l);
            if let Some(c) = sqrt_mod_prime(c2, l) {
                if c == 0 {
                    continue;
                }
                let d = mul_mod(b, pow_mod(mul_mod(2, c, l), l - 2, l), l);
                let y = [c, d];
                if self.mul(y, y) == x {
                    return Some(y);
                }
            }
        }
        None
    }

    /// All elements, in the order `a + b l`.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.l * self.l).map(move |i| [i % self.l, i / self.l])
    }

    pub fn index(&self, x: Fe) -> usize {
        (x[0] + x[1] * self.l) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms() {
        for l in [2u64, 3, 5, 7, 13] {
            let f = Fq2::new(l);
            let els: Vec<Fe> = f.elements().collect();
            assert_eq!(els.len() as u64, l * l);
            for &x in &els {
                if !f.is_zero(x) {
                    assert_eq!(f.mul(x, f.inv(x)), f.one(), "l={l} x={x:?}");
                    // x^(l^2 - 1) = 1
                    assert_eq!(f.pow(x, l * l - 1), f.one());
                }
                assert_eq!(f.frob(x), f.pow(x, l));
                assert_eq!(f.frob(f.frob(x)), x);
                if l != 2 {
                    let y = f.sqrt(f.mul(x, x)).unwrap();
                    assert_eq!(f.mul(y, y), f.mul(x, x));
                }
            }
        }
    }
}
