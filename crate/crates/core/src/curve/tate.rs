//! Tate's algorithm: Kodaira symbol, Tamagawa number and conductor exponent
//! at one prime, plus detection of non-minimal models.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{transform, Invariants};
use crate::numeric::{kronecker_symbol, mul_mod, ord_p_big, pow_mod};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    /// `I_n`; `I(0)` is good reduction.
    I(u32),
    II,
    III,
    IV,
    /// `I_n^*`.
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fiber.
    pub fn components(&self) -> u32 {
        match self {
            Kodaira::I(0) => 1,
            Kodaira::I(n) => *n,
            Kodaira::II => 1,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::IStar(n) => n + 5,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::II => f.write_str("II"),
            Kodaira::III => f.write_str("III"),
            Kodaira::IV => f.write_str("IV"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => f.write_str("IV*"),
            Kodaira::IIIStar => f.write_str("III*"),
            Kodaira::IIStar => f.write_str("II*"),
        }
    }
}

impl std::str::FromStr for Kodaira {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "II" => Kodaira::II,
            "III" => Kodaira::III,
            "IV" => Kodaira::IV,
            "IV*" => Kodaira::IVStar,
            "III*" => Kodaira::IIIStar,
            "II*" => Kodaira::IIStar,
            _ => {
                let body = s.strip_prefix('I').ok_or_else(|| format!("bad Kodaira symbol {s}"))?;
                match body.strip_suffix('*') {
                    Some(n) => Kodaira::IStar(n.parse().map_err(|_| format!("bad Kodaira symbol {s}"))?),
                    None => Kodaira::I(body.parse().map_err(|_| format!("bad Kodaira symbol {s}"))?),
                }
            }
        })
    }
}

impl Serialize for Kodaira {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Kodaira {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub q: u64,
    pub kodaira: Kodaira,
    pub tamagawa: u32,
    pub reduction: Reduction,
    pub disc_valuation: u32,
    pub conductor_exponent: u32,
}

impl LocalData {
    pub fn good(q: u64) -> LocalData {
        LocalData {
            q,
            kodaira: Kodaira::I(0),
            tamagawa: 1,
            reduction: Reduction::Good,
            disc_valuation: 0,
            conductor_exponent: 0,
        }
    }
}

pub(crate) struct TateOutput {
    pub data: LocalData,
    pub non_minimal: bool,
    /// For non-minimal input: the model after dividing out `p`.
    pub scaled: Option<[BigInt; 5]>,
}

fn divisible(x: &BigInt, m: &BigInt) -> bool {
    x.mod_floor(m).is_zero()
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Whether `a X^2 + b X + c` has a root modulo `p`.
fn quad_roots(a: &BigInt, b: &BigInt, c: &BigInt, p: u64) -> bool {
    let (a, b, c) = (residue(a, p), residue(b, p), residue(c, p));
    if p == 2 {
        return c == 0 || (a + b + c) % 2 == 0;
    }
    if a == 0 {
        return b != 0 || c == 0;
    }
    let disc = (mul_mod(b, b, p) + p - mul_mod(4 % p, mul_mod(a, c, p), p)) % p;
    disc == 0 || kronecker_symbol(disc as i64, p as i64).unwrap() == 1
}

type Poly = Vec<u64>; // little-endian coefficients mod p

fn poly_trim(mut f: Poly) -> Poly {
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    f
}

fn poly_rem(f: &Poly, g: &Poly, p: u64) -> Poly {
    let mut r = f.clone();
    let dg = g.len() - 1;
    let lead_inv = pow_mod(g[dg], p - 2, p);
    while r.len() > dg && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let coef = mul_mod(r[dr], lead_inv, p);
        for i in 0..=dg {
            let v = mul_mod(coef, g[i], p);
            r[dr - dg + i] = (r[dr - dg + i] + p - v) % p;
        }
        r = poly_trim(r);
        if r.len() - 1 < dg || (r.len() == 1 && r[0] == 0) {
            break;
        }
    }
    r
}

fn poly_mul_mod(a: &Poly, b: &Poly, m: &Poly, p: u64) -> Poly {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(&poly_trim(out), m, p)
}

fn poly_gcd(a: Poly, b: Poly, p: u64) -> Poly {
    let (mut a, mut b) = (poly_trim(a), poly_trim(b));
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Number of distinct roots of `T^3 + b T^2 + c T + d` modulo `p`.
fn cubic_root_count(b: &BigInt, c: &BigInt, d: &BigInt, p: u64) -> u32 {
    let f: Poly = vec![residue(d, p), residue(c, p), residue(b, p), 1];
    if p < 64 {
        return (0..p)
            .filter(|&x| {
                let v =
                    (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(f[2], mul_mod(x, x, p), p) + mul_mod(f[1], x, p) + f[0])
                        % p;
                v == 0
            })
            .count() as u32;
    }
    // gcd(T^p - T, f)
    let mut acc: Poly = vec![1];
    let mut base: Poly = vec![0, 1];
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &base, &f, p);
        }
        base = poly_mul_mod(&base, &base, &f, p);
        e >>= 1;
    }
    let mut h = acc;
    h.resize(h.len().max(2), 0);
    h[1] = (h[1] + p - 1) % p;
    let g = poly_gcd(f, poly_trim(h), p);
    (g.len() - 1) as u32
}

fn inv_mod_big(x: &BigInt, p: u64) -> BigInt {
    let r = residue(x, p);
    assert!(r != 0, "inverse of zero residue");
    BigInt::from(pow_mod(r, p - 2, p))
}

/// Run Tate's algorithm at `p` on an integral model.
pub(crate) fn tate(a0: &[BigInt; 5], p: u64) -> TateOutput {
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    let p3 = &p2 * &pb;
    let p4 = &p3 * &pb;
    let p6 = &p4 * &p2;
    let zero = BigInt::zero();
    let one = BigInt::one();
    let half = BigInt::from(if p == 2 { 0 } else { p.div_ceil(2) });
    let pm = |x: &BigInt| x.mod_floor(&pb);

    let mut a = a0.clone();
    let inv = Invariants::of(&a);
    let vd = ord_p_big(&inv.disc, p);
    let done = |kodaira, tamagawa, reduction, f: u32| TateOutput {
        data: LocalData { q: p, kodaira, tamagawa, reduction, disc_valuation: vd, conductor_exponent: f },
        non_minimal: false,
        scaled: None,
    };
    if vd == 0 {
        return done(Kodaira::I(0), 1, Reduction::Good, 0);
    }

    // move the singular point of the reduction to (0, 0)
    let (r, t) = {
        let [a1, a2, a3, a4, a6] = &a;
        if p == 2 {
            if divisible(&inv.b2, &pb) {
                let r = pm(a4);
                let t = pm(&(&r * (a2 + a4 + 1) + a6));
                (r, t)
            } else {
                let r = pm(a3);
                let t = pm(&(&r + a4));
                (r, t)
            }
        } else if p == 3 {
            let r = if divisible(&inv.b2, &pb) { pm(&-&inv.b6) } else { pm(&-(&inv.b2 * &inv.b4)) };
            let t = pm(&(a1 * &r + a3));
            (r, t)
        } else {
            let r = if divisible(&inv.c4, &pb) {
                pm(&-(inv_mod_big(&BigInt::from(12), p) * &inv.b2))
            } else {
                pm(&-(inv_mod_big(&(&inv.c4 * 12), p) * (&inv.c6 + &inv.b2 * &inv.c4)))
            };
            let t = pm(&-(&half * (a1 * &r + a3)));
            (r, t)
        }
    };
    a = transform(&a, &one, &r, &zero, &t);
    let inv = Invariants::of(&a);

    if !divisible(&inv.c4, &pb) {
        let split = quad_roots(&one, &a[0], &-&a[1], p);
        let (reduction, c) = if split {
            (Reduction::SplitMultiplicative, vd)
        } else {
            (Reduction::NonsplitMultiplicative, if vd % 2 == 0 { 2 } else { 1 })
        };
        return done(Kodaira::I(vd), c, reduction, 1);
    }

    if !divisible(&a[4], &p2) {
        return done(Kodaira::II, 1, Reduction::Additive, vd);
    }
    if !divisible(&inv.b8, &p3) {
        return done(Kodaira::III, 2, Reduction::Additive, vd - 1);
    }
    if !divisible(&inv.b6, &p3) {
        let c = if quad_roots(&one, &(&a[2] / &pb), &-(&a[4] / &p2), p) { 3 } else { 1 };
        return done(Kodaira::IV, c, Reduction::Additive, vd - 2);
    }

    // now arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
    let (s, t) = if p == 2 {
        (pm(&a[1]), &pb * pm(&(&a[4] / &p2)))
    } else if p == 3 {
        (a[0].clone(), a[2].clone())
    } else {
        (-(&a[0] * &half), -(&a[2] * &half))
    };
    a = transform(&a, &one, &zero, &s, &t);

    let b = &a[1] / &pb;
    let c = &a[3] / &p2;
    let d = &a[4] / &p3;
    let w = &d * &d * 27 - &b * &b * &c * &c + &b * &b * &b * &d * 4 - &b * &c * &d * 18 + &c * &c * &c * 4;
    let x = &c * 3 - &b * &b;

    if !divisible(&w, &pb) {
        let roots = cubic_root_count(&b, &c, &d, p);
        return done(Kodaira::IStar(0), 1 + roots, Reduction::Additive, vd - 4);
    }

    if !divisible(&x, &pb) {
        // double root: move it to T = 0
        let rho = if p == 2 {
            c.clone()
        } else if p == 3 {
            &b * &c
        } else {
            (&b * &c - &d * 9) * inv_mod_big(&(&x * 2), p)
        };
        let r = &pb * pm(&rho);
        a = transform(&a, &one, &r, &zero, &zero);
        let mut ix = 3u32;
        let mut iy = 3u32;
        let mut mx = p2.clone();
        let mut my = p2.clone();
        let cp;
        loop {
            let a3t = &a[2] / &my;
            let a6t = &a[4] / (&mx * &my);
            if !divisible(&(&a3t * &a3t + &a6t * 4), &pb) {
                cp = if quad_roots(&one, &a3t, &-&a6t, p) { 4 } else { 2 };
                break;
            }
            let t = if p == 2 { &my * pm(&a6t) } else { &my * pm(&-(&a3t * &half)) };
            a = transform(&a, &one, &zero, &zero, &t);
            my = &my * &pb;
            iy += 1;
            let a2t = &a[1] / &pb;
            let a4t = &a[3] / (&pb * &mx);
            let a6t = &a[4] / (&mx * &my);
            if !divisible(&(&a4t * &a4t - &a6t * &a2t * 4), &pb) {
                cp = if quad_roots(&a2t, &a4t, &a6t, p) { 4 } else { 2 };
                break;
            }
            let r = if p == 2 { &mx * pm(&(&a6t * &a2t)) } else { &mx * pm(&-(&a4t * inv_mod_big(&(&a2t * 2), p))) };
            a = transform(&a, &one, &r, &zero, &zero);
            mx = &mx * &pb;
            ix += 1;
        }
        return done(Kodaira::IStar(ix + iy - 5), cp, Reduction::Additive, vd + 1 - ix - iy);
    }

    // triple root: move it to T = 0
    let rho = if p == 2 {
        pm(&b)
    } else if p == 3 {
        pm(&-&d)
    } else {
        pm(&-(&b * inv_mod_big(&BigInt::from(3), p)))
    };
    a = transform(&a, &one, &(&pb * rho), &zero, &zero);
    let x3 = &a[2] / &p2;
    let x6 = &a[4] / &p4;
    if !divisible(&(&x3 * &x3 + &x6 * 4), &pb) {
        let c = if quad_roots(&one, &x3, &-&x6, p) { 3 } else { 1 };
        return done(Kodaira::IVStar, c, Reduction::Additive, vd - 6);
    }
    let t = if p == 2 { -(&p2 * pm(&x6)) } else { -(&p2 * pm(&(&x3 * &half))) };
    a = transform(&a, &one, &zero, &zero, &t);
    if !divisible(&a[3], &p4) {
        return done(Kodaira::IIIStar, 2, Reduction::Additive, vd - 7);
    }
    if !divisible(&a[4], &p6) {
        return done(Kodaira::IIStar, 1, Reduction::Additive, vd - 8);
    }
    let scaled = transform(&a, &pb, &zero, &zero, &zero);
    TateOutput {
        data: LocalData {
            q: p,
            kodaira: Kodaira::I(0),
            tamagawa: 0,
            reduction: Reduction::Additive,
            disc_valuation: vd,
            conductor_exponent: 0,
        },
        non_minimal: true,
        scaled: Some(scaled),
    }
}
