//! One-sided surjectivity test for the mod-p representation from Frobenius
//! data at good primes: traces for `p >= 5`, the factorization of the
//! 3-division polynomial for `p = 3`.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::EllipticCurve;
use crate::numeric::{inv_mod, is_prime, kronecker_symbol, mod_u64, mul_mod, primes_up_to};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GaloisError {
    #[error("p = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("p = {0} divides the conductor")]
    DividesConductor(u64),
}

/// The conjugacy-class data a Frobenius element can contribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `a^2 - 4l` a nonsquare and `a != 0`: excludes Borel subgroups and the
    /// normalizer of a split Cartan.
    NonsquareDiscriminant,
    /// `a^2 - 4l` a nonzero square and `a != 0`: excludes the normalizer of a
    /// nonsplit Cartan.
    SquareDiscriminant,
    /// `a^2 / l` outside the exceptional set: excludes projective images
    /// `A4`, `S4`, `A5`. Only used for `p >= 5`.
    NonExceptional,
    /// `p = 3`: the 3-division polynomial is irreducible mod `l`, so
    /// Frobenius is a 4-cycle on `P^1(F_3)`.
    DivisionQuarticIrreducible,
    /// `p = 3`: the 3-division polynomial is a linear times an irreducible
    /// cubic mod `l`, a 3-cycle on `P^1(F_3)`.
    DivisionQuarticLinearCubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageStatus {
    Surjective,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub l: u64,
    pub a_l: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageVerdict {
    pub p: u64,
    pub status: ImageStatus,
    pub witnesses: Vec<Witness>,
    pub missing: Vec<WitnessKind>,
    pub sample_bound: u64,
}

/// For `p = 3` traces cannot work: with `a != 0 mod 3` the discriminant
/// `a^2 - 4l` is `0` or a nonsquare. A 4-cycle and a 3-cycle instead make
/// the projective image `S4 = PGL_2(F_3)`, and the only index-two subgroup
/// of `GL_2(F_3)` is `SL_2(F_3)`, which contains `-1`; so the image is all
/// of `GL_2(F_3)`.
pub fn required_kinds(p: u64) -> Vec<WitnessKind> {
    if p == 3 {
        return vec![WitnessKind::DivisionQuarticIrreducible, WitnessKind::DivisionQuarticLinearCubic];
    }
    let mut k = vec![WitnessKind::NonsquareDiscriminant, WitnessKind::SquareDiscriminant];
    if p >= 5 {
        k.push(WitnessKind::NonExceptional);
    }
    k
}

/// Residues `z = tr^2 / det` attainable by elements of `GL_2(F_p)` whose
/// projective image has order 1, 2, 3, 4 or 5.
fn exceptional_set(p: u64) -> Vec<u64> {
    let mut s: Vec<u64> = vec![0, 1, 2, 4].into_iter().map(|v| v % p).collect();
    for z in 0..p {
        if (z * z + p * p - 3 * z + 1) % p == 0 {
            s.push(z);
        }
    }
    s.sort_unstable();
    s.dedup();
    s
}

/// Monic quartic `x^4 + c3 x^3 + ... + c0` over `F_l`, as `[c0, c1, c2, c3]`;
/// polynomials of degree `< 4` are reduced modulo it.
fn quartic_mulmod(f: &[u64; 4], u: &[u64; 4], v: &[u64; 4], l: u64) -> [u64; 4] {
    let mut prod = [0u64; 7];
    for i in 0..4 {
        for j in 0..4 {
            prod[i + j] = (prod[i + j] + mul_mod(u[i], v[j], l)) % l;
        }
    }
    for k in (4..7).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..4 {
            prod[k - 4 + i] = (prod[k - 4 + i] + l - mul_mod(c, f[i], l)) % l;
        }
    }
    [prod[0], prod[1], prod[2], prod[3]]
}

/// `x^(l^k) mod f`.
fn frobenius_power(f: &[u64; 4], l: u64, k: u32) -> [u64; 4] {
    let mut x = [0, 1, 0, 0];
    for _ in 0..k {
        let mut acc = [1, 0, 0, 0];
        let mut base = x;
        let mut e = l;
        while e > 0 {
            if e & 1 == 1 {
                acc = quartic_mulmod(f, &acc, &base, l);
            }
            base = quartic_mulmod(f, &base, &base, l);
            e >>= 1;
        }
        x = acc;
    }
    x
}

fn poly_degree(u: &[u64]) -> Option<usize> {
    u.iter().rposition(|&c| c != 0)
}

/// Degree of `gcd(u, v)` over `F_l`.
fn gcd_degree(u: &[u64], v: &[u64], l: u64) -> usize {
    let (mut a, mut b) = (u.to_vec(), v.to_vec());
    while let Some(db) = poly_degree(&b) {
        let inv = inv_mod(b[db] as i128, l as i128).expect("l is prime") as u64;
        while let Some(da) = poly_degree(&a) {
            if da < db {
                break;
            }
            let c = mul_mod(a[da], inv, l);
            for i in 0..=db {
                a[da - db + i] = (a[da - db + i] + l - mul_mod(c, b[i], l)) % l;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    poly_degree(&a).unwrap_or(0)
}

/// Factorization pattern of `psi_3 = 3x^4 + b2 x^3 + 3 b4 x^2 + 3 b6 x + b8`
/// modulo a good prime `l > 3`, where it is separable.
fn classify_division_quartic(e: &EllipticCurve, l: u64) -> Vec<WitnessKind> {
    let inv = e.invariants();
    let i3 = inv_mod(3, l as i128).expect("l > 3") as u64;
    let c = |n: &BigInt, k: u64| mul_mod(mul_mod(mod_u64(n, l), k, l), i3, l);
    let f = [c(&inv.b8, 1), c(&inv.b6, 3), c(&inv.b4, 3), c(&inv.b2, 1)];
    let monic = [f[0], f[1], f[2], f[3], 1];
    let sub_x = |mut g: [u64; 4]| {
        g[1] = (g[1] + l - 1) % l;
        g
    };
    let r1 = gcd_degree(&monic, &sub_x(frobenius_power(&f, l, 1)), l);
    let r2 = gcd_degree(&monic, &sub_x(frobenius_power(&f, l, 2)), l);
    match (r1, r2) {
        (0, 0) => vec![WitnessKind::DivisionQuarticIrreducible],
        (1, 1) => vec![WitnessKind::DivisionQuarticLinearCubic],
        _ => vec![],
    }
}

/// Classify the Frobenius data `(a, l)` modulo `p`.
pub fn classify(a: i64, l: u64, p: u64) -> Vec<WitnessKind> {
    let pi = p as i64;
    let am = a.rem_euclid(pi);
    let lm = (l % p) as i64;
    let u = (am * am - 4 * lm).rem_euclid(pi);
    let mut out = Vec::new();
    if am != 0 {
        match kronecker_symbol(u, pi).expect("p is nonzero") {
            -1 => out.push(WitnessKind::NonsquareDiscriminant),
            1 => out.push(WitnessKind::SquareDiscriminant),
            _ => {}
        }
    }
    if p >= 5 {
        let inv_l = crate::numeric::inv_mod(lm as i128, pi as i128).expect("l is a unit mod p") as i64;
        let z = (am * am % pi * inv_l).rem_euclid(pi) as u64;
        if !exceptional_set(p).contains(&z) {
            out.push(WitnessKind::NonExceptional);
        }
    }
    out
}

/// Scan good `l <= sample_bound`, `l != p`, collecting the first witness of
/// each required kind.
pub fn mod_p_image_surjective(e: &EllipticCurve, p: u64, sample_bound: u64) -> Result<ImageVerdict, GaloisError> {
    if p == 2 || !is_prime(p) {
        return Err(GaloisError::BadPrime(p));
    }
    if !e.is_good(p) {
        return Err(GaloisError::DividesConductor(p));
    }
    let need = required_kinds(p);
    let mut witnesses: Vec<Witness> = Vec::new();
    let primes: Vec<u64> = primes_up_to(sample_bound).into_iter().filter(|&l| l != p && e.is_good(l)).collect();
    // traces are computed a chunk at a time in parallel and folded in order
    'scan: for chunk in primes.chunks(512) {
        let traces: Vec<i64> = chunk.par_iter().map(|&l| e.trace_of_frobenius(l).expect("good prime")).collect();
        for (&l, &a) in chunk.iter().zip(&traces) {
            let kinds = if p == 3 {
                if l == 2 {
                    continue;
                }
                classify_division_quartic(e, l)
            } else {
                classify(a, l, p)
            };
            for kind in kinds {
                if !witnesses.iter().any(|w| w.kind == kind) {
                    witnesses.push(Witness { kind, l, a_l: a });
                }
            }
            if witnesses.len() == need.len() {
                break 'scan;
            }
        }
    }
    witnesses.sort_by_key(|w| w.kind);
    let missing: Vec<WitnessKind> = need.into_iter().filter(|k| !witnesses.iter().any(|w| w.kind == *k)).collect();
    let status = if missing.is_empty() { ImageStatus::Surjective } else { ImageStatus::Inconclusive };
    Ok(ImageVerdict { p, status, witnesses, missing, sample_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: [i64; 5]) -> EllipticCurve {
        EllipticCurve::from_i64(a, None).unwrap()
    }

    #[test]
    fn examples() {
        let v = mod_p_image_surjective(&curve([0, 0, 1, -1, 0]), 5, 10_000).unwrap();
        assert_eq!(v.status, ImageStatus::Surjective);
        assert!(v.missing.is_empty());
        let v = mod_p_image_surjective(&curve([0, 0, 0, -1, 0]), 5, 100_000).unwrap();
        assert_eq!(v.status, ImageStatus::Inconclusive);
        let v = mod_p_image_surjective(&curve([0, -1, 1, -10, -20]), 5, 100_000).unwrap();
        assert_eq!(v.status, ImageStatus::Inconclusive);
        // reducible: semisimplification 1 + cyclotomic, projectively cyclic of order 4
        assert_eq!(v.missing, vec![WitnessKind::NonsquareDiscriminant, WitnessKind::NonExceptional]);
        assert!(mod_p_image_surjective(&curve([0, 0, 1, -1, 0]), 37, 100).is_err());
        assert!(mod_p_image_surjective(&curve([0, 0, 1, -1, 0]), 2, 100).is_err());
    }

    #[test]
    fn mod_3_images() {
        // 37a1 has surjective mod-3 image
        let v = mod_p_image_surjective(&curve([0, 0, 1, -1, 0]), 3, 1000).unwrap();
        assert_eq!(v.status, ImageStatus::Surjective, "{v:?}");
        // 19a1 has a rational 3-torsion point, so psi_3 always has a root;
        // with two independent 3-isogenies the image is diagonal, no 3-cycle
        let v = mod_p_image_surjective(&curve([0, 1, 1, -9, -15]), 3, 100_000).unwrap();
        assert_eq!(v.missing, vec![WitnessKind::DivisionQuarticIrreducible, WitnessKind::DivisionQuarticLinearCubic]);
        // 14a1 has a point of order 6
        let v = mod_p_image_surjective(&curve([1, 0, 1, 4, -6]), 3, 100_000).unwrap();
        assert_eq!(v.status, ImageStatus::Inconclusive);
    }

    #[test]
    fn division_quartic_patterns_by_brute_force() {
        // count roots of psi_3 in F_l directly and compare with the pattern
        let e = curve([0, 0, 1, -1, 0]);
        let inv = e.invariants();
        for l in primes_up_to(400).into_iter().filter(|&l| l > 3 && e.is_good(l)) {
            let li = l as i64;
            let m = |n: &BigInt| mod_u64(n, l) as i64;
            let roots = (0..li)
                .filter(|&x| {
                    let v = ((((3 * x + m(&inv.b2)) % li * x + 3 * m(&inv.b4)) % li * x + 3 * m(&inv.b6)) % li * x
                        + m(&inv.b8))
                        % li;
                    v == 0
                })
                .count();
            let kinds = classify_division_quartic(&e, l);
            if kinds == vec![WitnessKind::DivisionQuarticIrreducible] {
                assert_eq!(roots, 0, "{l}");
            }
            if kinds == vec![WitnessKind::DivisionQuarticLinearCubic] {
                assert_eq!(roots, 1, "{l}");
            }
            if roots == 1 && kinds.is_empty() {
                panic!("one root but no linear-cubic pattern at {l}");
            }
        }
    }

    #[test]
    fn exceptional_set_mod_5_and_7() {
        // z^2 - 3z + 1 has the double root 4 mod 5 and no roots mod 7
        assert_eq!(exceptional_set(5), vec![0, 1, 2, 4]);
        assert_eq!(exceptional_set(7), vec![0, 1, 2, 4]);
        assert_eq!(exceptional_set(11), vec![0, 1, 2, 4, 5, 9]);
    }

    #[test]
    fn monotone_in_bound() {
        let e = curve([0, 0, 1, -1, 0]);
        let mut seen_surjective = false;
        for bound in [10u64, 20, 50, 100, 200, 1000] {
            let v = mod_p_image_surjective(&e, 7, bound).unwrap();
            if seen_surjective {
                assert_eq!(v.status, ImageStatus::Surjective);
            }
            seen_surjective |= v.status == ImageStatus::Surjective;
        }
        assert!(seen_surjective);
    }
}
