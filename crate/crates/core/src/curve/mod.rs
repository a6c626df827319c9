//! Integral Weierstrass models over Q.

mod analytic;
mod count;
mod height;
mod modp;
mod point;
mod search;
mod tate;
mod torsion;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::numeric::{factor, NumericError};

pub use analytic::{analytic_local_height, periods, weierstrass_point, Periods};
pub use count::{an_coefficients, hasse_bound_holds};
pub use height::{naive_height, HeightBreakdown};
pub use modp::ModPointCurve;
pub use point::RationalPoint;
pub use search::SaturationCheck;
pub use tate::{Kodaira, LocalData, Reduction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("singular model: discriminant is zero")]
    Singular,
    #[error("model is not minimal at {0}")]
    NotMinimal(u64),
    #[error("bad prime {0} does not fit in 64 bits")]
    PrimeTooLarge(String),
    #[error("{0} is a prime of bad reduction")]
    BadPrime(u64),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("twist parameter {0} must be a nonzero squarefree integer")]
    BadTwist(i64),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// The standard b- and c-invariants of a Weierstrass model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
}

impl Invariants {
    pub fn of(a: &[BigInt; 5]) -> Invariants {
        let [a1, a2, a3, a4, a6] = a;
        let b2 = a1 * a1 + a2 * 4;
        let b4 = a1 * a3 + a4 * 2;
        let b6 = a3 * a3 + a6 * 4;
        let b8 = a1 * a1 * a6 + a2 * a6 * 4 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = &b2 * &b2 - &b4 * 24;
        let b2_cubed: BigInt = &b2 * &b2 * &b2;
        let c6: BigInt = -b2_cubed + &b2 * &b4 * 36 - &b6 * 216;
        let b2b2b8: BigInt = &b2 * &b2 * &b8;
        let disc: BigInt = -b2b2b8 - &b4 * &b4 * &b4 * 8 - &b6 * &b6 * 27 + &b2 * &b4 * &b6 * 9;
        Invariants { b2, b4, b6, b8, c4, c6, disc }
    }
}

/// Apply the coordinate change `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`
/// to an integral model. Panics if the result is not integral.
pub(crate) fn transform(a: &[BigInt; 5], u: &BigInt, r: &BigInt, s: &BigInt, t: &BigInt) -> [BigInt; 5] {
    let [a1, a2, a3, a4, a6] = a;
    let a6n = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
    let a4n = a4 - s * a3 + r * a2 * 2 - (t + r * s) * a1 + r * r * 3 - s * t * 2;
    let a3n = a3 + r * a1 + t * 2;
    let a2n = a2 - s * a1 + r * 3 - s * s;
    let a1n = a1 + s * 2;
    let mut out = [a1n, a2n, a3n, a4n, a6n];
    if !u.is_one() {
        for (i, w) in [1usize, 2, 3, 4, 6].iter().enumerate() {
            let (q, rem) = out[i].div_rem(&num_traits::pow(u.clone(), *w));
            assert!(rem.is_zero(), "non-integral scaling");
            out[i] = q;
        }
    }
    out
}

/// Reduce `a1, a3` to `{0,1}` and `a2` to `{-1,0,1}` by an integral
/// change of coordinates with `u = 1`.
pub(crate) fn reduced_model(a: &[BigInt; 5]) -> [BigInt; 5] {
    let zero = BigInt::zero();
    let one = BigInt::one();
    let a1m = a[0].mod_floor(&BigInt::from(2));
    let s = (&a1m - &a[0]) / 2;
    let b = transform(a, &one, &zero, &s, &zero);
    let target = {
        let m = b[1].mod_floor(&BigInt::from(3));
        if m == BigInt::from(2) {
            BigInt::from(-1)
        } else {
            m
        }
    };
    let r = (&target - &b[1]) / 3;
    let c = transform(&b, &one, &r, &zero, &zero);
    let a3m = c[2].mod_floor(&BigInt::from(2));
    let t = (&a3m - &c[2]) / 2;
    transform(&c, &one, &zero, &zero, &t)
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct EllipticCurve {
    a: [BigInt; 5],
    inv: Invariants,
    conductor: BigInt,
    local: Vec<LocalData>,
    label: Option<String>,
}

#[derive(Clone, Serialize, Deserialize)]
struct CurveRepr {
    #[serde(with = "coeffs")]
    a: [BigInt; 5],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Coefficients as JSON integers, or decimal strings beyond 64 bits.
mod coeffs {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Coeff {
        Small(i64),
        Big(String),
    }

    pub fn serialize<S: Serializer>(a: &[BigInt; 5], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Coeff> =
            a.iter().map(|n| n.to_i64().map_or_else(|| Coeff::Big(n.to_string()), Coeff::Small)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[BigInt; 5], D::Error> {
        let v: Vec<Coeff> = Vec::deserialize(d)?;
        let v: Vec<BigInt> = v
            .into_iter()
            .map(|c| match c {
                Coeff::Small(n) => Ok(BigInt::from(n)),
                Coeff::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect::<Result<_, _>>()?;
        v.try_into().map_err(|_| serde::de::Error::custom("a curve needs five coefficients"))
    }
}

impl TryFrom<CurveRepr> for EllipticCurve {
    type Error = CurveError;
    fn try_from(r: CurveRepr) -> Result<Self, CurveError> {
        EllipticCurve::new(r.a, r.label)
    }
}

impl From<EllipticCurve> for CurveRepr {
    fn from(e: EllipticCurve) -> Self {
        CurveRepr { a: e.a, label: e.label }
    }
}

impl EllipticCurve {
    /// Validate a globally minimal integral model and compute its local data.
    pub fn new(a: [BigInt; 5], label: Option<String>) -> Result<EllipticCurve, CurveError> {
        let inv = Invariants::of(&a);
        if inv.disc.is_zero() {
            return Err(CurveError::Singular);
        }
        let mut local = Vec::new();
        let mut conductor = BigInt::one();
        for (p, _) in factor(&inv.disc) {
            let q = p.to_u64().ok_or_else(|| CurveError::PrimeTooLarge(p.to_string()))?;
            let out = tate::tate(&a, q);
            if out.non_minimal {
                return Err(CurveError::NotMinimal(q));
            }
            conductor *= num_traits::pow(BigInt::from(q), out.data.conductor_exponent as usize);
            local.push(out.data);
        }
        Ok(EllipticCurve { a, inv, conductor, local, label })
    }

    pub fn from_i64(a: [i64; 5], label: Option<&str>) -> Result<EllipticCurve, CurveError> {
        EllipticCurve::new(a.map(BigInt::from), label.map(str::to_string))
    }

    /// Globally minimal reduced model of an arbitrary integral model.
    pub fn minimal_model(a: [BigInt; 5], label: Option<String>) -> Result<EllipticCurve, CurveError> {
        let inv = Invariants::of(&a);
        if inv.disc.is_zero() {
            return Err(CurveError::Singular);
        }
        let mut a = a;
        for (p, _) in factor(&inv.disc) {
            let q = p.to_u64().ok_or_else(|| CurveError::PrimeTooLarge(p.to_string()))?;
            loop {
                let out = tate::tate(&a, q);
                if !out.non_minimal {
                    break;
                }
                a = out.scaled.expect("non-minimal output carries the scaled model");
            }
        }
        EllipticCurve::new(reduced_model(&a), label)
    }

    pub fn a(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn a_i64(&self) -> Option<[i64; 5]> {
        let mut out = [0i64; 5];
        for (o, v) in out.iter_mut().zip(self.a.iter()) {
            *o = v.to_i64()?;
        }
        Some(out)
    }

    pub fn invariants(&self) -> &Invariants {
        &self.inv
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.inv.disc
    }

    pub fn conductor(&self) -> &BigInt {
        &self.conductor
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Local data at all primes of bad reduction, ascending.
    pub fn bad_local_data(&self) -> &[LocalData] {
        &self.local
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        self.local.iter().map(|d| d.q).collect()
    }

    pub fn is_good(&self, q: u64) -> bool {
        !self.local.iter().any(|d| d.q == q)
    }

    /// Local data at any prime `q`.
    pub fn local_data(&self, q: u64) -> Result<LocalData, CurveError> {
        if !crate::numeric::is_prime(q) {
            return Err(NumericError::NotPrime(q).into());
        }
        Ok(self.local.iter().find(|d| d.q == q).cloned().unwrap_or_else(|| LocalData::good(q)))
    }

    /// Whether two curves are isomorphic over Q (same minimal invariants).
    pub fn is_isomorphic(&self, other: &EllipticCurve) -> bool {
        // minimal models: isomorphic iff u = ±1, i.e. equal c4 and c6
        self.inv.c4 == other.inv.c4 && self.inv.c6 == other.inv.c6
    }

    /// Quadratic twist by a squarefree `d`, minimalized.
    pub fn quadratic_twist(&self, d: i64) -> Result<EllipticCurve, CurveError> {
        if d == 0 || !crate::numeric::is_squarefree(&BigInt::from(d)) {
            return Err(CurveError::BadTwist(d));
        }
        let d = BigInt::from(d);
        let c4 = &self.inv.c4 * &d * &d;
        let c6 = &self.inv.c6 * &d * &d * &d;
        // y^2 = x^3 - 27 c4 x - 54 c6 is integral with these invariants (times u = 6)
        let z = BigInt::zero();
        let label = self.label.as_ref().map(|l| format!("{l}^({d})"));
        EllipticCurve::minimal_model([z.clone(), z.clone(), z, c4 * -27, c6 * -54], label)
    }

    /// Map a point on this curve to the short model `Y^2 = X^3 - 27 c4 X - 54 c6`.
    pub fn to_short(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = &self.a;
                let xs = x * BigInt::from(36) + BigRational::from_integer(&self.inv.b2 * 3);
                let ys = (y * BigInt::from(2) + x * a1 + BigRational::from_integer(a3.clone())) * BigInt::from(108);
                RationalPoint::Affine { x: xs, y: ys }
            }
        }
    }

    /// Inverse of [`EllipticCurve::to_short`].
    pub fn from_short(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x: xs, y: ys } => {
                let [a1, _, a3, _, _] = &self.a;
                let x = (xs - BigRational::from_integer(&self.inv.b2 * 3)) / BigInt::from(36);
                let y = (ys / BigInt::from(108) - &x * a1 - BigRational::from_integer(a3.clone())) / BigInt::from(2);
                RationalPoint::Affine { x, y }
            }
        }
    }

    /// Map a point on this curve to the twist by `d`, returning
    /// `(u, v sqrt d)` coordinates scaled into the twist's minimal model.
    /// Input is a point `(X, Y sqrt d)` given by `(X, Y)` on the short model
    /// of `self`; output lies on `twist`.
    pub fn twist_point_from_short(
        &self,
        twist: &EllipticCurve,
        d: i64,
        short_xy: &RationalPoint,
    ) -> Result<RationalPoint, CurveError> {
        let RationalPoint::Affine { x, y } = short_xy else {
            return Ok(RationalPoint::Infinity);
        };
        let d = BigInt::from(d);
        // (X, Y sqrt d) on Y^2 = X^3 - 27c4 X - 54c6 maps to (dX, d^2 Y) on the twisted short model,
        // whose invariants are u^4 and u^6 times those of the twist's minimal model
        let (c4, c6) = (&self.inv.c4 * &d * &d, &self.inv.c6 * &d * &d * &d);
        let (t4, t6) = (&twist.inv.c4, &twist.inv.c6);
        let u2 = if !c4.is_zero() && !c6.is_zero() {
            BigRational::new(&c6 * t4, &c4 * t6)
        } else if c6.is_zero() {
            rational_root(&BigRational::new(c4, t4.clone()), 2).ok_or(CurveError::NotOnCurve)?
        } else {
            rational_root(&BigRational::new(c6, t6.clone()), 3).ok_or(CurveError::NotOnCurve)?
        };
        let u = rational_root(&u2, 2).ok_or(CurveError::NotOnCurve)?;
        let tx = x * &d / &u2;
        let ty = y * (&d * &d) / (&u2 * &u);
        let p = twist.from_short(&RationalPoint::Affine { x: tx, y: ty });
        if twist.contains(&p) {
            Ok(p)
        } else {
            Err(CurveError::NotOnCurve)
        }
    }
}

/// Positive `k`-th root of a positive rational, if it is rational.
fn rational_root(r: &BigRational, k: u32) -> Option<BigRational> {
    use num_traits::Signed;
    if !r.is_positive() {
        return None;
    }
    let n = r.numer().nth_root(k);
    let d = r.denom().nth_root(k);
    (n.pow(k) == *r.numer() && d.pow(k) == *r.denom()).then(|| BigRational::new(n, d))
}

impl fmt::Debug for EllipticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "EllipticCurve({}, [{}, {}, {}, {}, {}])",
            self.label.as_deref().unwrap_or("?"),
            self.a[0],
            self.a[1],
            self.a[2],
            self.a[3],
            self.a[4]
        )
    }
}

impl PartialEq for EllipticCurve {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

impl Eq for EllipticCurve {}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: [i64; 5]) -> EllipticCurve {
        EllipticCurve::from_i64(a, None).unwrap()
    }

    #[test]
    fn invariants_37a1() {
        let e = curve([0, 0, 1, -1, 0]);
        assert_eq!(e.discriminant(), &BigInt::from(37));
        assert_eq!(e.conductor(), &BigInt::from(37));
        assert_eq!(e.invariants().c4, BigInt::from(48));
        assert_eq!(e.invariants().c6, BigInt::from(-216));
    }

    #[test]
    fn rejects_singular_and_non_minimal() {
        assert!(matches!(EllipticCurve::from_i64([0, 0, 0, 0, 0], None), Err(CurveError::Singular)));
        // 37a1 scaled by u = 2
        let e = curve([0, 0, 1, -1, 0]);
        let a = e.a().clone();
        let scaled = [&a[0] * 2, &a[1] * 4, &a[2] * 8, &a[3] * 16, &a[4] * 64];
        assert!(matches!(EllipticCurve::new(scaled.clone(), None), Err(CurveError::NotMinimal(2))));
        let m = EllipticCurve::minimal_model(scaled, None).unwrap();
        assert_eq!(m, e);
    }

    #[test]
    fn twist_involution() {
        for a in [[0, 0, 1, -1, 0], [0, -1, 1, -10, -20], [1, -1, 1, 0, 0]] {
            let e = curve(a);
            for d in [-1i64, 2, -3, 5, -7, 13] {
                let t = e.quadratic_twist(d).unwrap();
                let back = t.quadratic_twist(d).unwrap();
                assert!(back.is_isomorphic(&e), "{a:?} {d}");
                assert_eq!(back.a(), e.a());
            }
            assert_eq!(e.quadratic_twist(1).unwrap().a(), e.a());
        }
        assert!(curve([0, 0, 1, -1, 0]).quadratic_twist(4).is_err());
    }

    #[test]
    fn short_twist_formula() {
        // y^2 = x^3 + a x + b twisted by d is y^2 = x^3 + a d^2 x + b d^3 (up to minimality)
        let e = curve([0, 0, 0, -1, 0]);
        let t = e.quadratic_twist(-1).unwrap();
        let expect = EllipticCurve::minimal_model([0, 0, 0, -1, 0].map(BigInt::from), None).unwrap();
        assert!(t.is_isomorphic(&expect));
        let e = curve([0, 0, 0, 0, 1]);
        let t = e.quadratic_twist(5).unwrap();
        let expect = EllipticCurve::minimal_model([0, 0, 0, 0, 125].map(BigInt::from), None).unwrap();
        assert!(t.is_isomorphic(&expect));
    }

    #[test]
    fn short_model_roundtrip() {
        let e = curve([1, -1, 1, 0, 0]);
        let p = RationalPoint::from_i64(0, 0);
        assert!(e.contains(&p));
        let s = e.to_short(&p);
        assert_eq!(e.from_short(&s), p);
    }
}
