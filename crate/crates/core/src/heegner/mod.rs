//! Heegner discriminants and CM points on `X_0(N)`, the modular
//! parametrization as a q-series, the trace `y_K`, its index and the
//! distribution relation at a Kolyvagin prime.

mod forms;
mod point;
mod series;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::curve::{CurveError, EllipticCurve};
use crate::numeric::{is_fundamental_discriminant, kronecker_symbol, prime_divisors_u64, Complex, Float};

pub use forms::{reduced_forms, QuadForm};
pub use point::{
    heegner_index, heegner_point, verify_distribution, DistributionCheck, EigenSign, HeegnerPointResult, IndexReport,
    Recognized, RecognizedOn, Status,
};
pub use series::{modular_param, terms_needed, QExpansion};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeegnerError {
    #[error("{0} is not a negative discriminant")]
    BadDiscriminant(i64),
    #[error("-{0} is not a fundamental discriminant")]
    NotFundamental(u64),
    #[error("D = {d} is not a Heegner discriminant: {q} | N is not split")]
    NotHeegner { d: u64, q: u64 },
    #[error("D = {0} has extra units; enable small discriminants explicitly")]
    ExtraUnits(u64),
    #[error("conductor {c} is not coprime to N D")]
    ConductorNotCoprime { c: u64 },
    #[error("l = {0} is not an inert prime")]
    NotInert(u64),
    #[error("{needed} q-series terms needed, only {allowed} allowed")]
    InsufficientTerms { needed: usize, allowed: usize },
    #[error("Im tau must be positive")]
    NotUpperHalfPlane,
    #[error("p = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("point is torsion")]
    Torsion,
    #[error("height ratio {ratio} is not within 1e-10 of a square; generator may not be saturated")]
    NotSquare { ratio: String },
    #[error("generator does not lie on the curve carrying y_K")]
    WrongCurve,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// `D > 0` with `-D` fundamental and every prime of `N` split in `Q(sqrt -D)`.
pub fn is_heegner_discriminant(n: u64, d: u64) -> bool {
    is_fundamental_discriminant(-(d as i64))
        && prime_divisors_u64(&BigInt::from(n)).into_iter().all(|q| kronecker_symbol(-(d as i64), q as i64) == Ok(1))
}

/// All Heegner discriminants `D <= bound` for level `N`, ascending.
pub fn heegner_discriminants(n: u64, bound: u64) -> Vec<u64> {
    (3..=bound).filter(|&d| is_heegner_discriminant(n, d)).collect()
}

/// A CM point `tau = (-B + sqrt(B^2 - 4AC)) / 2A` with `N | A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HeegnerForm {
    #[serde(flatten)]
    pub form: QuadForm,
    /// Conductor of the order: `B^2 - 4AC = -D c^2`.
    pub conductor: u64,
}

impl HeegnerForm {
    pub fn tau(&self, prec: u32) -> Complex {
        let QuadForm { a, b, .. } = self.form;
        let two_a = Float::from_i64(2 * a, prec);
        let re = &Float::from_i64(-b, prec) / &two_a;
        let im = &Float::from_i64(-self.form.disc(), prec).sqrt() / &two_a;
        Complex::new(re, im)
    }

    /// `Im tau` as an `f64`, for term estimates.
    pub fn im_tau_f64(&self) -> f64 {
        (-self.form.disc() as f64).sqrt() / (2.0 * self.form.a as f64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeegnerSetup {
    #[serde(skip)]
    pub curve: EllipticCurve,
    pub n: u64,
    pub d: u64,
    /// Least nonnegative `beta` with `beta^2 = -D mod 4N`.
    pub beta: u64,
    pub h: usize,
    pub forms: Vec<QuadForm>,
}

impl HeegnerSetup {
    pub fn new(curve: &EllipticCurve, d: u64, allow_extra_units: bool) -> Result<HeegnerSetup, HeegnerError> {
        let n = curve.conductor().to_u64().ok_or_else(|| CurveError::PrimeTooLarge(curve.conductor().to_string()))?;
        if !is_fundamental_discriminant(-(d as i64)) {
            return Err(HeegnerError::NotFundamental(d));
        }
        if matches!(d, 3 | 4) && !allow_extra_units {
            return Err(HeegnerError::ExtraUnits(d));
        }
        for q in prime_divisors_u64(&BigInt::from(n)) {
            if kronecker_symbol(-(d as i64), q as i64) != Ok(1) {
                return Err(HeegnerError::NotHeegner { d, q });
            }
        }
        let m = 4 * n as i128;
        let beta = (0..2 * n as i128)
            .find(|&b| (b * b + d as i128) % m == 0)
            .ok_or(HeegnerError::NotHeegner { d, q: 2 })? as u64;
        let forms = reduced_forms(-(d as i64))?;
        Ok(HeegnerSetup { curve: curve.clone(), n, d, beta, h: forms.len(), forms })
    }

    /// One Heegner form per class of `Pic(O_c)`: each reduced form of
    /// discriminant `-D c^2` composed with `(N, c beta, *)`.
    pub fn heegner_forms(&self, c: u64) -> Result<Vec<HeegnerForm>, HeegnerError> {
        if c == 0 || c.gcd(&(self.n * self.d)) != 1 {
            return Err(HeegnerError::ConductorNotCoprime { c });
        }
        let disc = -(self.d as i64) * (c as i64) * (c as i64);
        let n = self.n as i64;
        let beta_c = (self.beta as i128 * c as i128).rem_euclid(2 * n as i128);
        let mut out = Vec::new();
        for q in reduced_forms(disc)? {
            let q = forms::coprime_leading(&q, n);
            let (b, _) = forms::crt(q.b as i128, 2 * q.a as i128, beta_c, 2 * n as i128).expect("parities agree");
            let a = q.a as i128 * n as i128;
            // shift B into (-A, A]
            let b = b + 2 * a * Integer::div_floor(&(a - b), &(2 * a));
            let cc = (b * b - disc as i128) / (4 * a);
            debug_assert_eq!((b * b - disc as i128) % (4 * a), 0);
            let form = QuadForm { a: a as i64, b: b as i64, c: cc as i64 };
            out.push(HeegnerForm { form, conductor: c });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e37() -> EllipticCurve {
        EllipticCurve::from_i64([0, 0, 1, -1, 0], Some("37a1")).unwrap()
    }

    #[test]
    fn discriminants_for_37() {
        let ds = heegner_discriminants(37, 12);
        for d in [3, 4, 7, 11] {
            assert!(ds.contains(&d), "{d}");
        }
        assert!(!ds.contains(&8));
        assert!(!heegner_discriminants(37, 200).contains(&12));
        let all: Vec<u64> = (3..=40).filter(|&d| is_fundamental_discriminant(-(d as i64))).collect();
        assert_eq!(heegner_discriminants(1, 40), all);
    }

    #[test]
    fn setup_rules() {
        let e = e37();
        let s = HeegnerSetup::new(&e, 7, false).unwrap();
        assert_eq!(s.h, 1);
        assert_eq!((s.beta * s.beta + 7) % (4 * 37), 0);
        assert!(matches!(HeegnerSetup::new(&e, 8, false), Err(HeegnerError::NotHeegner { .. })));
        assert!(matches!(HeegnerSetup::new(&e, 3, false), Err(HeegnerError::ExtraUnits(3))));
        assert!(HeegnerSetup::new(&e, 3, true).is_ok());
        assert!(matches!(HeegnerSetup::new(&e, 12, false), Err(HeegnerError::NotFundamental(12))));
    }

    #[test]
    fn forms_at_level() {
        let e = e37();
        let s = HeegnerSetup::new(&e, 7, false).unwrap();
        let f1 = s.heegner_forms(1).unwrap();
        assert_eq!(f1.len(), 1);
        for l in [2u64, 3, 5, 11, 13, 17] {
            let fl = s.heegner_forms(l).unwrap();
            // h(-D c^2) = h(-D) (l - (-D|l)) for D > 4
            let expect = l as i64 - kronecker_symbol(-7, l as i64).unwrap() as i64;
            assert_eq!(fl.len() as i64, expect, "{l}");
            for f in fl.iter().chain(&f1) {
                let QuadForm { a, b, c } = f.form;
                assert_eq!(a % 37, 0);
                assert_eq!((b * b - 4 * a * c), -7 * (f.conductor * f.conductor) as i64);
                assert_eq!((b - (s.beta * f.conductor) as i64).rem_euclid(74), 0);
                assert!(f.form.is_primitive());
                assert!(f.tau(64).im.is_positive());
            }
        }
        assert!(s.heegner_forms(37).is_err());
        assert!(s.heegner_forms(7).is_err());
    }
}
