//! Positive definite binary quadratic forms: reduction, enumeration of
//! reduced forms, Dirichlet composition with a level-`N` form.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::HeegnerError;

/// `A x^2 + B xy + C y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> QuadForm {
        QuadForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }

    /// `Q(r x + u y, s x + v y)` for `r v - s u = 1`.
    pub fn transform(&self, r: i64, u: i64, s: i64, v: i64) -> QuadForm {
        debug_assert_eq!(r as i128 * v as i128 - s as i128 * u as i128, 1);
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (r, u, s, v) = (r as i128, u as i128, s as i128, v as i128);
        let na = a * r * r + b * r * s + c * s * s;
        let nb = 2 * a * r * u + b * (r * v + s * u) + 2 * c * s * v;
        let nc = a * u * u + b * u * v + c * v * v;
        QuadForm { a: na as i64, b: nb as i64, c: nc as i64 }
    }

    /// The reduced form properly equivalent to this positive definite one.
    pub fn reduce(&self) -> QuadForm {
        let QuadForm { mut a, mut b, mut c } = *self;
        assert!(a > 0 && b * b - 4 * a * c < 0, "positive definite form expected");
        loop {
            // normalize b into (-a, a]
            if b <= -a || b > a {
                let k = Integer::div_floor(&(a - b), &(2 * a));
                let nb = b + 2 * a * k;
                c += k * (b + a * k);
                b = nb;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            return QuadForm { a, b, c };
        }
    }
}

/// Check `disc < 0`, `disc = 0, 1 mod 4`.
pub fn check_discriminant(disc: i64) -> Result<(), HeegnerError> {
    if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(HeegnerError::BadDiscriminant(disc));
    }
    Ok(())
}

/// All reduced primitive forms of discriminant `disc`, ordered by `a`
/// ascending, then `b` descending.
pub fn reduced_forms(disc: i64) -> Result<Vec<QuadForm>, HeegnerError> {
    check_discriminant(disc)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -disc {
        for b in (-a + 1..=a).rev() {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = QuadForm { a, b, c: num / (4 * a) };
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    Ok(out)
}

/// `x = r1 mod m1`, `x = r2 mod m2`, if compatible; result mod `lcm`.
pub(crate) fn crt(r1: i128, m1: i128, r2: i128, m2: i128) -> Option<(i128, i128)> {
    let g = m1.gcd(&m2);
    if (r2 - r1).rem_euclid(g) != 0 {
        return None;
    }
    let l = m1 / g * m2;
    let m1g = m1 / g;
    let m2g = m2 / g;
    let inv = crate::numeric::inv_mod(m1g.rem_euclid(m2g), m2g).unwrap_or(0);
    let k = ((r2 - r1) / g).rem_euclid(m2g) * inv % m2g.max(1);
    Some(((r1 + m1 * k).rem_euclid(l), l))
}

/// A properly equivalent form whose leading coefficient is the least value
/// coprime to `n` properly represented with `|x|, |y| <= 8`.
pub(crate) fn coprime_leading(q: &QuadForm, n: i64) -> QuadForm {
    if q.a.gcd(&n) == 1 {
        return *q;
    }
    let mut best: Option<(i128, i64, i64)> = None;
    for r in -8i64..=8 {
        for s in 0i64..=8 {
            if r.gcd(&s) != 1 || (s == 0 && r != 1) {
                continue;
            }
            let v = q.eval(r, s);
            if (v as i64).gcd(&n) != 1 {
                continue;
            }
            if best.is_none_or(|(bv, _, _)| v < bv) {
                best = Some((v, r, s));
            }
        }
    }
    let (_, r, s) = best.expect("a primitive form represents values coprime to n");
    // complete (r, s) to a matrix of determinant one
    let g = r.extended_gcd(&s);
    let sg = g.gcd.signum();
    let (v, u) = (sg * g.x, -sg * g.y);
    q.transform(r, u, s, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_discriminants() {
        assert_eq!(reduced_forms(-3).unwrap(), vec![QuadForm::new(1, 1, 1)]);
        assert_eq!(reduced_forms(-4).unwrap(), vec![QuadForm::new(1, 0, 1)]);
        assert_eq!(
            reduced_forms(-23).unwrap(),
            vec![QuadForm::new(1, 1, 6), QuadForm::new(2, 1, 3), QuadForm::new(2, -1, 3)]
        );
        assert!(reduced_forms(-5).is_err());
        assert!(reduced_forms(8).is_err());
    }

    #[test]
    fn reduction_lands_in_list() {
        let list = reduced_forms(-23).unwrap();
        for (r, u, s, v) in [(1, 1, 0, 1), (2, 1, 1, 1), (3, -1, 7, -2), (5, 2, 2, 1)] {
            for f in &list {
                let g = f.transform(r, u, s, v);
                assert_eq!(g.disc(), -23);
                assert_eq!(&g.reduce(), f);
            }
        }
    }

    #[test]
    fn crt_basic() {
        assert_eq!(crt(1, 4, 3, 6), Some((9, 12)));
        assert_eq!(crt(0, 4, 1, 6), None);
        assert_eq!(crt(2, 3, 3, 5), Some((8, 15)));
    }
}
