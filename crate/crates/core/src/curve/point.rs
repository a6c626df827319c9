use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::EllipticCurve;

/// A point of `E(Q)`; affine coordinates are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

impl RationalPoint {
    pub fn new(x: BigRational, y: BigRational) -> RationalPoint {
        RationalPoint::Affine { x, y }
    }

    pub fn from_i64(x: i64, y: i64) -> RationalPoint {
        RationalPoint::Affine { x: BigRational::from_integer(x.into()), y: BigRational::from_integer(y.into()) }
    }

    /// `(xn/xd, yn/yd)`.
    pub fn from_fractions(xn: i64, xd: i64, yn: i64, yd: i64) -> RationalPoint {
        RationalPoint::Affine { x: BigRational::new(xn.into(), xd.into()), y: BigRational::new(yn.into(), yd.into()) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Affine { x, .. } => Some(x),
            RationalPoint::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Affine { y, .. } => Some(y),
            RationalPoint::Infinity => None,
        }
    }

    /// Parse `x_n/x_d,y_n/y_d` (denominators optional).
    pub fn parse(s: &str) -> Result<RationalPoint, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("expected x,y but got {s:?}"));
        }
        let q = |t: &str| -> Result<BigRational, String> {
            let (n, d) = match t.split_once('/') {
                Some((n, d)) => (n, d),
                None => (t, "1"),
            };
            let n: BigInt = n.trim().parse().map_err(|_| format!("bad rational {t:?}"))?;
            let d: BigInt = d.trim().parse().map_err(|_| format!("bad rational {t:?}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {t:?}"));
            }
            Ok(BigRational::new(n, d))
        };
        Ok(RationalPoint::Affine { x: q(parts[0])?, y: q(parts[1])? })
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Infinity => f.write_str("O"),
            RationalPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// Serialized as `null` for infinity or `[xn, xd, yn, yd]` with decimal
/// strings for the integers.
impl Serialize for RationalPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RationalPoint::Infinity => s.serialize_none(),
            RationalPoint::Affine { x, y } => {
                let v = [x.numer(), x.denom(), y.numer(), y.denom()].map(|n| n.to_string());
                v.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Option<Vec<serde_json::Value>> = Option::deserialize(d)?;
        let Some(v) = v else { return Ok(RationalPoint::Infinity) };
        if v.len() != 4 {
            return Err(serde::de::Error::custom("point must have four integer entries"));
        }
        let mut ints = Vec::with_capacity(4);
        for e in &v {
            let n: BigInt = match e {
                serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom)?,
                serde_json::Value::Number(n) => n.to_string().parse().map_err(serde::de::Error::custom)?,
                _ => return Err(serde::de::Error::custom("point entries must be integers")),
            };
            ints.push(n);
        }
        if ints[1].is_zero() || ints[3].is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(RationalPoint::Affine {
            x: BigRational::new(ints[0].clone(), ints[1].clone()),
            y: BigRational::new(ints[2].clone(), ints[3].clone()),
        })
    }
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

impl EllipticCurve {
    pub fn contains(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Infinity => true,
            RationalPoint::Affine { x, y } => {
                let [a1, a2, a3, a4, a6] = self.a().clone().map(|v| rat(&v));
                let lhs = y * y + &a1 * x * y + &a3 * y;
                let rhs = x * x * x + &a2 * x * x + &a4 * x + &a6;
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.a();
                RationalPoint::Affine { x: x.clone(), y: -y - x * rat(a1) - rat(a3) }
            }
        }
    }

    pub fn add(&self, p: &RationalPoint, r: &RationalPoint) -> RationalPoint {
        let (x1, y1, x2, y2) = match (p, r) {
            (RationalPoint::Infinity, _) => return r.clone(),
            (_, RationalPoint::Infinity) => return p.clone(),
            (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let [a1, a2, a3, a4, a6] = self.a().clone().map(|v| rat(&v));
        let (lambda, nu) = if x1 == x2 {
            let denom = y1 * BigInt::from(2) + &a1 * x1 + &a3;
            if y1 != y2 || denom.is_zero() {
                return RationalPoint::Infinity;
            }
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            let lam = (&three * x1 * x1 + &two * &a2 * x1 + &a4 - &a1 * y1) / &denom;
            let nu = (-(x1 * x1 * x1) + &a4 * x1 + &two * &a6 - &a3 * y1) / &denom;
            (lam, nu)
        } else {
            let lam = (y2 - y1) / (x2 - x1);
            let nu = (y1 * x2 - y2 * x1) / (x2 - x1);
            (lam, nu)
        };
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - x1 - x2;
        let y3 = -(&lambda + &a1) * &x3 - &nu - &a3;
        RationalPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &RationalPoint) -> RationalPoint {
        self.add(p, p)
    }

    /// `[k] P` for any integer `k`.
    pub fn mul(&self, p: &RationalPoint, k: i64) -> RationalPoint {
        let mut base = if k < 0 { self.neg(p) } else { p.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = RationalPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Order of `p` if it is at most 16 (Mazur's bound), else `None`.
    pub fn torsion_order_of(&self, p: &RationalPoint) -> Option<u32> {
        let mut acc = p.clone();
        for k in 1..=16u32 {
            if acc.is_infinity() {
                return Some(k);
            }
            // torsion points are integral on a minimal model except at 2 (Lutz-Nagell on the short model)
            if let RationalPoint::Affine { x, .. } = &acc {
                if x.denom() > &BigInt::from(4) {
                    return None;
                }
            }
            acc = self.add(&acc, p);
        }
        None
    }

    /// Whether the reduction of `p` mod `q` on this (minimal) model is a
    /// nonsingular point of the special fiber, i.e. `p` lies in `E^0(Q_q)`.
    pub fn in_identity_component(&self, p: &RationalPoint, q: u64) -> bool {
        let RationalPoint::Affine { x, y } = p else { return true };
        if self.is_good(q) {
            return true;
        }
        let qb = BigInt::from(q);
        let integral = |r: &BigRational| !(r.denom() % &qb).is_zero();
        if !integral(x) || !integral(y) {
            return true; // reduces to the point at infinity
        }
        let [a1, a2, a3, a4, _] = self.a();
        let fy = y * BigInt::from(2) + x * a1 + rat(a3);
        let fx = y * a1 - x * x * BigInt::from(3) - x * (a2 * 2) - rat(a4);
        let vanishes = |r: &BigRational| (r.numer() % &qb).is_zero();
        !(vanishes(&fy) && vanishes(&fx))
    }
}
