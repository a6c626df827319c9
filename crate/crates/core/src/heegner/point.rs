//! The trace `y_K` of the level-`N` Heegner points, its algebraic
//! recognition, the index exponent `m_0`, and the distribution relation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{terms_needed, QExpansion};
use super::{HeegnerError, HeegnerForm, HeegnerSetup};
use crate::curve::{analytic_local_height, periods, weierstrass_point, EllipticCurve, Periods, RationalPoint};
use crate::numeric::{convergents, digits_to_bits, exact_sqrt, is_prime, kronecker_symbol, ord_p_big, Complex, Float};

/// How complex conjugation acts on the recognized multiple of `y_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSign {
    /// Fixed by conjugation: a point of `E(Q)`.
    Plus,
    /// Negated by conjugation: a point of the twist `E^(-D)(Q)`.
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecognizedOn {
    Curve,
    Twist,
}

#[derive(Clone, Debug, Serialize)]
pub struct Recognized {
    pub on: RecognizedOn,
    /// Squarefree `d` with `Q(sqrt d) = K`, when on the twist.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist_d: Option<i64>,
    pub curve: EllipticCurve,
    pub point: RationalPoint,
    pub height: Float,
    /// `2 lambda_inf(kz) + finite local terms`, from the analytic side;
    /// only available on `E` itself.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_height: Option<Float>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Recognized,
    Unrecognized,
    Torsion,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeegnerPointResult {
    pub status: Status,
    pub digits: u32,
    pub d: u64,
    pub beta: u64,
    pub forms: Vec<HeegnerForm>,
    pub n_terms: usize,
    /// Sum of `z(tau)` over the forms, reduced into the period cell.
    pub z: Complex,
    pub w1: Float,
    pub w2: Complex,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSign>,
    /// The recognized point is `multiplier * y_K`.
    pub multiplier: u32,
    /// `(x, y)` of `multiplier * z` on `E(C)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_xy: Option<(Complex, Complex)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recognized: Option<Recognized>,
    /// Distance between analytic and exact coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Float>,
}

impl HeegnerPointResult {
    pub fn is_recognized(&self) -> bool {
        self.recognized.is_some()
    }
}

/// `sum z(tau_f)` over `forms`, evaluated in parallel and added in the given
/// order. Returns the sum and the largest term count used.
fn trace_sum(
    e: &EllipticCurve,
    forms: &[HeegnerForm],
    digits: u32,
    max_terms: usize,
    prec: u32,
) -> Result<(Complex, usize), HeegnerError> {
    let counts: Vec<usize> = forms.iter().map(|f| terms_needed(f.im_tau_f64(), digits + 4)).collect();
    let n_terms = counts.iter().copied().max().unwrap_or(1);
    if n_terms > max_terms {
        return Err(HeegnerError::InsufficientTerms { needed: n_terms, allowed: max_terms });
    }
    let q = QExpansion::new(e, n_terms);
    let zs: Vec<Complex> = forms.par_iter().zip(&counts).map(|(f, &n)| q.eval(&f.tau(prec), n, prec)).collect();
    let sum = zs.iter().fold(Complex::zero(prec), |acc, z| &acc + z);
    Ok((sum, n_terms))
}

/// `4x^3 + b2 x^2 + 2 b4 x + b6 = (2y + a1 x + a3)^2`.
fn two_division(e: &EllipticCurve, x: &BigRational) -> BigRational {
    let inv = e.invariants();
    let r = |n: &BigInt| BigRational::from_integer(n.clone());
    ((x * BigInt::from(4) + r(&inv.b2)) * x + r(&inv.b4) * BigInt::from(2)) * x + r(&inv.b6)
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    Some(BigRational::new(exact_sqrt(r.numer())?, exact_sqrt(r.denom())?))
}

fn rat_float(r: &BigRational, prec: u32) -> Float {
    Float::from_rational(r, prec)
}

/// Squarefree part of `-D`.
fn field_d(d: u64) -> i64 {
    if d % 4 == 0 {
        -(d as i64) / 4
    } else {
        -(d as i64)
    }
}

/// Try the continued-fraction convergents of `Re x` as exact abscissae.
fn recognize(
    e: &EllipticCurve,
    d: u64,
    sign: EigenSign,
    x: &Complex,
    y: &Complex,
    bits: u32,
) -> Result<Option<(Recognized, Float)>, HeegnerError> {
    let prec = x.prec();
    let tol = Float::one(prec).mul_pow2(-(bits as i64) / 2);
    let [a1, _, a3, _, _] = e.a();
    // 2y + a1 x + a3 is real (Plus) or purely imaginary (Minus)
    let fy =
        &(&y.mul_i64(2) + &x.scale(&Float::from_bigint(a1, prec))) + &Complex::from_real(Float::from_bigint(a3, prec));
    let scale = Float::max(&Float::one(prec), &x.re.abs());
    let max_den = BigInt::from(2).pow(bits * 9 / 20);
    for c in convergents(&x.re, &max_den) {
        let err = (&rat_float(&c, prec) - &x.re).abs();
        if err > &tol * &scale {
            continue;
        }
        let f = two_division(e, &c);
        match sign {
            EigenSign::Plus => {
                let Some(s) = rational_sqrt(&f) else { continue };
                let s = if fy.re.is_negative() { -s } else { s };
                let yv = (&s - &c * a1 - BigRational::from_integer(a3.clone())) / BigInt::from(2);
                let p = RationalPoint::new(c.clone(), yv.clone());
                if !e.contains(&p) {
                    continue;
                }
                let residual = &(&err + &(&rat_float(&yv, prec) - &y.re).abs()) + &y.im.abs();
                let height = e.canonical_height(&p, bits)?;
                let rec = Recognized {
                    on: RecognizedOn::Curve,
                    twist_d: None,
                    curve: e.clone(),
                    point: p,
                    height,
                    analytic_height: None,
                };
                return Ok(Some((rec, residual)));
            }
            EigenSign::Minus => {
                let df = field_d(d);
                let Some(v) = rational_sqrt(&(&f / BigInt::from(df))) else { continue };
                // 2y + a1 x + a3 = i sqrt|d| v
                let v = if fy.im.is_negative() { -v } else { v };
                let root_d = Float::from_i64(-df, prec).sqrt();
                let residual = &(&err + &(&(&rat_float(&v, prec) * &root_d) - &fy.im).abs()) + &fy.re.abs();
                let inv = e.invariants();
                let short = RationalPoint::new(
                    &c * BigInt::from(36) + BigRational::from_integer(&inv.b2 * 3),
                    &v * BigInt::from(108),
                );
                let twist = e.quadratic_twist(df)?;
                let p = e.twist_point_from_short(&twist, df, &short)?;
                let height = twist.canonical_height(&p, bits)?;
                let rec = Recognized {
                    on: RecognizedOn::Twist,
                    twist_d: Some(df),
                    curve: twist,
                    point: p,
                    height,
                    analytic_height: None,
                };
                return Ok(Some((rec, residual)));
            }
        }
    }
    Ok(None)
}

/// Exponent of `E(Q)_tors` (its order works as well for the multiplier).
fn torsion_exponent(e: &EllipticCurve) -> u32 {
    e.torsion_points().iter().filter_map(|p| e.torsion_order_of(p)).fold(1, num_integer::lcm)
}

/// Compute `y_K = sum over Pic(O_K)` of the Heegner points, decide the
/// conjugation sign and recognize `k y_K` for `k = 2` (or `2 t` with `t` the
/// torsion exponent when `2 y_K` is not an eigenvector).
pub fn heegner_point(setup: &HeegnerSetup, digits: u32, max_terms: usize) -> Result<HeegnerPointResult, HeegnerError> {
    let e = &setup.curve;
    let bits = digits_to_bits(digits);
    let w = bits + 32;
    let forms = setup.heegner_forms(1)?;
    let (sum, n_terms) = trace_sum(e, &forms, digits, max_terms, w)?;
    let per = periods(e, w);
    let z = per.reduce(&sum);
    let tol = Float::one(w).mul_pow2(-(bits as i64) / 2);
    let mut base = HeegnerPointResult {
        status: Status::Unrecognized,
        digits,
        d: setup.d,
        beta: setup.beta,
        forms,
        n_terms,
        z: z.with_prec(bits),
        w1: per.w1.with_prec(bits),
        w2: per.w2.with_prec(bits),
        eigen: None,
        multiplier: 2,
        analytic_xy: None,
        recognized: None,
        residual: None,
    };
    let t = torsion_exponent(e);
    let mut ks = vec![2u32];
    if t > 2 {
        ks.push(2 * t);
    }
    for k in ks {
        let kz = per.reduce(&z.mul_i64(k as i64));
        if per.distance_to_lattice(&kz) < tol {
            base.status = Status::Torsion;
            base.multiplier = k;
            return Ok(base);
        }
        let conj = kz.conj();
        let plus = per.distance_to_lattice(&(&kz - &conj));
        let minus = per.distance_to_lattice(&(&kz + &conj));
        let sign = if plus < tol {
            EigenSign::Plus
        } else if minus < tol {
            EigenSign::Minus
        } else {
            continue;
        };
        base.eigen = Some(sign);
        base.multiplier = k;
        let (x, y) = weierstrass_point(e, &per, &kz);
        let found = recognize(e, setup.d, sign, &x, &y, bits)?;
        base.analytic_xy = Some((x.with_prec(bits), y.with_prec(bits)));
        if let Some((mut rec, residual)) = found {
            if rec.on == RecognizedOn::Curve {
                rec.analytic_height = Some(analytic_height(e, &per, &kz, &rec.point, bits)?);
            }
            base.status = Status::Recognized;
            base.recognized = Some(rec);
            base.residual = Some(residual.with_prec(bits));
        }
        return Ok(base);
    }
    Ok(base)
}

/// Height of `P` with the archimedean term taken from the elliptic log `z`.
fn analytic_height(
    e: &EllipticCurve,
    per: &Periods,
    z: &Complex,
    p: &RationalPoint,
    bits: u32,
) -> Result<Float, HeegnerError> {
    let b = e.height_breakdown(p, bits)?;
    let arch = analytic_local_height(e, per, z).mul_pow2(1).with_prec(bits);
    Ok(b.finite.iter().fold(arch, |acc, (_, v)| &acc + v))
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub p: u64,
    /// `h(k y_K) / h(g)`.
    pub ratio: Float,
    /// `round(sqrt(ratio)) = k [E(K) : Z y_K]` up to powers of 2.
    pub root: BigInt,
    pub m0: u32,
}

/// `m_0 = ord_p round(sqrt(h(k y_K) / h(g)))` for a generator `g` of the
/// curve carrying the recognized point.
pub fn heegner_index(
    result: &HeegnerPointResult,
    p: u64,
    generator: &RationalPoint,
) -> Result<IndexReport, HeegnerError> {
    if p == 2 || !is_prime(p) {
        return Err(HeegnerError::BadPrime(p));
    }
    let rec = result.recognized.as_ref().ok_or(HeegnerError::Torsion)?;
    if !rec.curve.contains(generator) {
        return Err(HeegnerError::WrongCurve);
    }
    let bits = rec.height.prec();
    let hg = rec.curve.canonical_height(generator, bits)?;
    if hg.is_zero() || rec.height.is_zero() {
        return Err(HeegnerError::Torsion);
    }
    let ratio = &rec.height / &hg;
    let root = ratio.sqrt().round();
    let sq = Float::from_bigint(&(&root * &root), bits);
    let tol = Float::from_f64(1e-10, bits);
    if root.is_zero() || (&ratio - &sq).abs() > tol {
        return Err(HeegnerError::NotSquare { ratio: ratio.to_decimal_string(20) });
    }
    Ok(IndexReport { p, m0: ord_p_big(&root, p), ratio, root })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistributionCheck {
    pub l: u64,
    pub a_l: i64,
    pub forms_l: usize,
    pub forms_1: usize,
    pub n_terms: usize,
    pub digits: u32,
    /// Distance of `sum_l z - a_l sum_1 z` to the lattice.
    pub residual: Float,
}

impl DistributionCheck {
    /// `residual < 10^(-digits / 2)`.
    pub fn passed(&self) -> bool {
        let prec = self.residual.prec();
        let scale = Float::from_bigint(&BigInt::from(10).pow(self.digits / 2), prec);
        (&self.residual * &scale) < Float::one(prec)
    }
}

/// `Tr_{K[l]/K[1]} y_l = a_l y_1` on the level of elliptic logarithms, for
/// `l` inert in `K`.
pub fn verify_distribution(
    setup: &HeegnerSetup,
    l: u64,
    digits: u32,
    max_terms: usize,
) -> Result<DistributionCheck, HeegnerError> {
    if !is_prime(l) || kronecker_symbol(-(setup.d as i64), l as i64) != Ok(-1) {
        return Err(HeegnerError::NotInert(l));
    }
    let e = &setup.curve;
    let bits = digits_to_bits(digits);
    let w = bits + 32;
    let fl = setup.heegner_forms(l)?;
    let f1 = setup.heegner_forms(1)?;
    let a_l = e.ap(l);
    let (sl, nl) = trace_sum(e, &fl, digits, max_terms, w)?;
    let (s1, n1) = trace_sum(e, &f1, digits, max_terms, w)?;
    let per = periods(e, w);
    let diff = &sl - &s1.mul_i64(a_l);
    let residual = per.distance_to_lattice(&diff).with_prec(bits);
    Ok(DistributionCheck { l, a_l, forms_l: fl.len(), forms_1: f1.len(), n_terms: nl.max(n1), digits, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e37() -> EllipticCurve {
        EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap()
    }

    #[test]
    fn y_k_for_37a1_d7() {
        let e = e37();
        let s = HeegnerSetup::new(&e, 7, false).unwrap();
        let r = heegner_point(&s, 40, 1 << 20).unwrap();
        let rec = r.recognized.as_ref().expect("recognized");
        assert_eq!(r.eigen, Some(EigenSign::Plus));
        assert!(e.contains(&rec.point));
        assert!(e.torsion_order_of(&rec.point).is_none());
        let gap = (&rec.height - rec.analytic_height.as_ref().unwrap()).abs();
        assert!(gap.abs_below_pow2(-60), "{gap:?}");
        let idx = heegner_index(&r, 3, &RationalPoint::from_i64(0, 0)).unwrap();
        assert!(r.residual.as_ref().unwrap().abs_below_pow2(-60));
        assert_eq!(idx.m0, 0);
    }

    #[test]
    fn index_rules() {
        let e = e37();
        let s = HeegnerSetup::new(&e, 7, false).unwrap();
        let r = heegner_point(&s, 30, 1 << 20).unwrap();
        let g = RationalPoint::from_i64(0, 0);
        assert!(matches!(heegner_index(&r, 2, &g), Err(HeegnerError::BadPrime(2))));
        assert!(matches!(heegner_index(&r, 3, &RationalPoint::from_i64(0, 1)), Err(HeegnerError::WrongCurve)));
        // a generator three times too big gives a ratio 1/9 that is not a square integer
        let g3 = e.mul(&g, 3);
        assert!(matches!(heegner_index(&r, 3, &g3), Err(HeegnerError::NotSquare { .. })));
    }

    #[test]
    fn distribution_relation() {
        let e = e37();
        let s = HeegnerSetup::new(&e, 7, false).unwrap();
        // a_17 = 0: the level-17 sum alone is a period
        let lo = verify_distribution(&s, 17, 30, 1 << 20).unwrap();
        let hi = verify_distribution(&s, 17, 60, 1 << 20).unwrap();
        assert_eq!((lo.a_l, lo.forms_l, lo.forms_1), (0, 18, 1));
        assert!(lo.passed() && hi.passed());
        // ten more orders of magnitude from doubling the precision
        assert!((&hi.residual * &Float::from_f64(1e10, 256)) < lo.residual);
        let r = verify_distribution(&s, 3, 40, 1 << 20).unwrap();
        assert_eq!(r.a_l, -3);
        assert!(r.passed());
        assert!(matches!(verify_distribution(&s, 11, 30, 1 << 20), Err(HeegnerError::NotInert(11))));
        assert!(matches!(verify_distribution(&s, 17, 60, 100), Err(HeegnerError::InsufficientTerms { .. })));
    }
}
