//! Fixed-precision binary floating point: `mant * 2^exp` with `mant`
//! normalized to exactly `prec` bits. Rounding is to nearest on the
//! magnitude. Transcendentals run in fixed point with guard bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumericError;

/// Decimal-digit precision request. Working precision adds guard digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_DIGITS: u32 = 15;
    pub const GUARD_DIGITS: u32 = 10;

    pub fn new(digits: u32) -> Result<Self, NumericError> {
        if digits < Self::MIN_DIGITS {
            return Err(NumericError::PrecisionTooLow(digits));
        }
        Ok(Precision(digits))
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Binary precision including the guard digits.
    pub fn bits(self) -> u32 {
        digits_to_bits(self.0 + Self::GUARD_DIGITS)
    }
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 1
}

#[derive(Clone)]
pub struct Float {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

fn bit_len(n: &BigInt) -> i64 {
    n.bits() as i64
}

/// Round `|m| / 2^s` to nearest (ties away from zero) keeping the sign.
fn round_shift(m: &BigInt, s: i64) -> BigInt {
    if s <= 0 {
        return m << ((-s) as usize);
    }
    let s = s as usize;
    let mag = m.magnitude();
    let mut q = mag >> s;
    if mag.bit(s as u64 - 1) {
        q += 1u32;
    }
    BigInt::from_biguint(if m.is_negative() { Sign::Minus } else { Sign::Plus }, q)
}

impl Float {
    fn normalize(mant: BigInt, exp: i64, prec: u32) -> Float {
        if mant.is_zero() {
            return Float { mant, exp: 0, prec };
        }
        let shift = bit_len(&mant) - prec as i64;
        let (mut mant, mut exp) = if shift != 0 { (round_shift(&mant, shift), exp + shift) } else { (mant, exp) };
        if bit_len(&mant) > prec as i64 {
            // rounding carried into a new bit; the low bit is zero
            mant >>= 1usize;
            exp += 1;
        }
        Float { mant, exp, prec }
    }

    pub fn zero(prec: u32) -> Float {
        Float { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn one(prec: u32) -> Float {
        Float::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Float {
        Float::normalize(BigInt::from(v), 0, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Float {
        Float::normalize(v.clone(), 0, prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Float {
        assert!(!den.is_zero(), "division by zero");
        Float::from_bigint(num, prec + 2) / Float::from_bigint(den, prec + 2)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Float {
        Float::from_ratio(r.numer(), r.denom(), prec).with_prec(prec)
    }

    /// `m * 2^e` exactly (then rounded to `prec`).
    pub fn from_parts(m: BigInt, e: i64, prec: u32) -> Float {
        Float::normalize(m, e, prec)
    }

    /// Nearest float to an `f64` (exact for 53-bit precision and above).
    pub fn from_f64(v: f64, prec: u32) -> Float {
        assert!(v.is_finite(), "non-finite f64");
        if v == 0.0 {
            return Float::zero(prec);
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_field == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_field - 1075) };
        Float::normalize(BigInt::from(m) * sign, e, prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Float {
        Float::normalize(self.mant.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Float {
        Float { mant: self.mant.abs(), exp: self.exp, prec: self.prec }
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    /// Returns `i64::MIN` for zero.
    pub fn top_exponent(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + bit_len(&self.mant)
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Float {
        if self.is_zero() {
            return self.clone();
        }
        Float { mant: self.mant.clone(), exp: self.exp + k, prec: self.prec }
    }

    pub fn mul_i64(&self, k: i64) -> Float {
        Float::normalize(&self.mant * k, self.exp, self.prec)
    }

    pub fn div_i64(&self, k: i64) -> Float {
        self / &Float::from_i64(k, self.prec)
    }

    pub fn square(&self) -> Float {
        self * self
    }

    pub fn recip(&self) -> Float {
        &Float::one(self.prec) / self
    }

    pub fn sqrt(&self) -> Float {
        assert!(!self.is_negative(), "sqrt of negative float");
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec;
        let mut k = (2 * prec as i64 + 4 - bit_len(&self.mant)).max(0);
        if (self.exp - k) % 2 != 0 {
            k += 1;
        }
        let r = (&self.mant << (k as usize)).sqrt();
        Float::normalize(r, (self.exp - k) / 2, prec)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.mant << (self.exp as usize);
        }
        let s = (-self.exp) as usize;
        let (q, _) = self.mant.div_mod_floor(&(BigInt::one() << s));
        q
    }

    pub fn round(&self) -> BigInt {
        (self + &Float::from_parts(BigInt::one(), -1, self.prec + 2)).floor()
    }

    /// Round to `Float` with an integral value.
    pub fn round_float(&self) -> Float {
        Float::from_bigint(&self.round(), self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let shift = (bit_len(&self.mant) - 60).max(0);
        let m = round_shift(&self.mant, shift).to_f64().unwrap();
        let e = self.exp + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        // split the scaling to avoid intermediate overflow
        let half = (e / 2) as i32;
        m * 2f64.powi(half) * 2f64.powi(e as i32 - half)
    }

    /// The value as an exact rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as usize))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    /// `round(x * 2^w)` as an integer.
    pub(crate) fn to_fixed(&self, w: u32) -> BigInt {
        round_shift(&self.mant, -(self.exp + w as i64))
    }

    pub(crate) fn from_fixed(f: BigInt, w: u32, prec: u32) -> Float {
        Float::normalize(f, -(w as i64), prec)
    }

    pub fn max(a: &Float, b: &Float) -> Float {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min(a: &Float, b: &Float) -> Float {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// `|self| < 2^k`.
    pub fn abs_below_pow2(&self, k: i64) -> bool {
        self.is_zero() || self.top_exponent() <= k
    }

    pub fn pi(prec: u32) -> Float {
        let w = prec + 16;
        Float::from_fixed(pi_fixed(w), w, prec)
    }

    pub fn ln2(prec: u32) -> Float {
        let w = prec + 16;
        Float::from_fixed(ln2_fixed(w), w, prec)
    }

    pub fn exp(&self) -> Float {
        let prec = self.prec;
        if self.is_zero() {
            return Float::one(prec);
        }
        assert!(self.abs_below_pow2(40), "exp argument too large");
        let xf = self.to_f64();
        let k = (xf / std::f64::consts::LN_2).round() as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros();
        const HALVINGS: u32 = 12;
        let w = prec + 40 + HALVINGS;
        let wl = w + kbits + 8;
        let r_fixed = self.to_fixed(wl) - ln2_fixed(wl) * k;
        let r = round_shift(&r_fixed, (wl - w) as i64);
        // r / 2^HALVINGS in fixed point at w + HALVINGS bits is r itself
        let big_w = w + HALVINGS;
        let one = BigInt::one() << (big_w as usize);
        let mut sum = one.clone();
        let mut term = one;
        let mut n: i64 = 1;
        loop {
            term = (&term * &r) >> (big_w as usize);
            term /= n;
            if term.is_zero() {
                break;
            }
            sum += &term;
            n += 1;
        }
        for _ in 0..HALVINGS {
            sum = (&sum * &sum) >> (big_w as usize);
        }
        Float::normalize(sum, k - big_w as i64, prec)
    }

    pub fn ln(&self) -> Float {
        assert!(self.is_positive(), "ln of nonpositive float");
        let prec = self.prec;
        let w = prec + 40;
        let bits = bit_len(&self.mant);
        let mut e_total = self.exp + bits;
        // m = mant / 2^bits in [1/2, 1); move to [1/sqrt2, sqrt2)
        let mut m_fixed = round_shift(&self.mant, bits - w as i64);
        let one = BigInt::one() << (w as usize);
        // 0.70710678 * 2^w
        let threshold = (&one * 7071067811865475244u64) / 10_000_000_000_000_000_000u64;
        if m_fixed < threshold {
            m_fixed <<= 1usize;
            e_total -= 1;
        }
        let ln_m = atanh_series(&(&m_fixed - &one), &(&m_fixed + &one), w) * 2;
        let total = ln_m + ln2_fixed(w + 8) * e_total / 256;
        Float::from_fixed(total, w, prec)
    }

    pub fn sin_cos(&self) -> (Float, Float) {
        let prec = self.prec;
        if self.is_zero() {
            return (Float::zero(prec), Float::one(prec));
        }
        assert!(self.abs_below_pow2(60), "trig argument too large");
        let w = prec + 40;
        let xf = self.to_f64();
        let k = (xf / std::f64::consts::FRAC_PI_2).round() as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros();
        let wl = w + kbits + 8;
        let r_fixed = self.to_fixed(wl) - (pi_fixed(wl) >> 1usize) * k;
        let r = round_shift(&r_fixed, (wl - w) as i64);
        let wu = w as usize;
        let one = BigInt::one() << wu;
        let r2 = (&r * &r) >> wu;
        // sin
        let mut s = r.clone();
        let mut term = r.clone();
        let mut n: i64 = 1;
        loop {
            term = -((&term * &r2) >> wu) / ((n + 1) * (n + 2));
            if term.is_zero() {
                break;
            }
            s += &term;
            n += 2;
        }
        let mut c = one.clone();
        let mut term = one;
        let mut n: i64 = 0;
        loop {
            term = -((&term * &r2) >> wu) / ((n + 1) * (n + 2));
            if term.is_zero() {
                break;
            }
            c += &term;
            n += 2;
        }
        let (s, c) = match k.rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        };
        (Float::from_fixed(s, w, prec), Float::from_fixed(c, w, prec))
    }

    pub fn atan2(y: &Float, x: &Float) -> Float {
        let prec = y.prec.min(x.prec);
        assert!(!(x.is_zero() && y.is_zero()), "atan2(0, 0)");
        // atan(t) for |t| <= 1 via argument halving then series
        let pi = Float::pi(prec);
        if x.abs() >= y.abs() {
            let base = atan_small(&(y / x));
            if x.is_positive() {
                base
            } else if !y.is_negative() {
                &base + &pi
            } else {
                &base - &pi
            }
        } else {
            let base = atan_small(&(x / y));
            let half_pi = pi.mul_pow2(-1);
            if y.is_positive() {
                &half_pi - &base
            } else {
                &(-&half_pi) - &base
            }
        }
    }

    /// Parse a decimal literal such as `-12.5e-3`.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<Float, NumericError> {
        let bad = || NumericError::Parse(s.to_string());
        let s = s.trim();
        let (mantissa, exp10) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let (neg, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            n = -n;
        }
        let e = exp10 - frac_part.len() as i64;
        let ten = BigInt::from(10);
        Ok(if e >= 0 {
            Float::from_bigint(&(n * num_traits::pow(ten, e as usize)), prec)
        } else {
            Float::from_ratio(&n, &num_traits::pow(ten, (-e) as usize), prec)
        })
    }

    /// Decimal rendering with `sig` significant digits: positional for
    /// moderate magnitudes, scientific otherwise.
    pub fn to_decimal_string(&self, sig: usize) -> String {
        let sig = sig.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let log2 = self.top_exponent() as f64;
        let mut e10 = ((log2 - 1.0) * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigInt::from(10);
        let digits = loop {
            let a = sig as i64 - 1 - e10;
            let mut num = self.mant.abs();
            let mut den = BigInt::one();
            if a >= 0 {
                num *= num_traits::pow(ten.clone(), a as usize);
            } else {
                den *= num_traits::pow(ten.clone(), (-a) as usize);
            }
            if self.exp >= 0 {
                num <<= self.exp as usize;
            } else {
                den <<= (-self.exp) as usize;
            }
            let (q, r) = num.div_rem(&den);
            let s_int = if (r << 1usize) >= den { q + 1 } else { q };
            let s = s_int.to_string();
            if s.len() > sig {
                e10 += 1;
                continue;
            }
            if s.len() < sig {
                e10 -= 1;
                continue;
            }
            break s;
        };
        let sign = if self.is_negative() { "-" } else { "" };
        if (-12..=40).contains(&e10) {
            if e10 >= 0 {
                let int_len = e10 as usize + 1;
                if int_len >= sig {
                    format!("{sign}{}{}", digits, "0".repeat(int_len - sig))
                } else {
                    format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
                }
            } else {
                format!("{sign}0.{}{}", "0".repeat((-e10 - 1) as usize), digits)
            }
        } else {
            let rest = if sig > 1 { format!(".{}", &digits[1..]) } else { String::new() };
            format!("{sign}{}{rest}e{e10}", &digits[..1])
        }
    }
}

/// `atan(t)` for `|t| <= 1`.
fn atan_small(t: &Float) -> Float {
    let prec = t.prec;
    let w = prec + 40;
    let wu = w as usize;
    let one = BigInt::one() << wu;
    let mut x = t.to_fixed(w);
    // halve the argument: atan(x) = 2 atan(x / (1 + sqrt(1 + x^2)))
    const HALVINGS: u32 = 4;
    for _ in 0..HALVINGS {
        let x2 = (&x * &x) >> wu;
        let root = ((&one + x2) << wu).sqrt();
        x = (&x << wu) / (&one + root);
    }
    let x2 = (&x * &x) >> wu;
    let mut sum = x.clone();
    let mut pow = x;
    let mut k: i64 = 1;
    loop {
        pow = -((&pow * &x2) >> wu);
        let term = &pow / (2 * k + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        k += 1;
    }
    Float::from_fixed(sum << (HALVINGS as usize), w, prec)
}

/// `atanh(a/b) * 2^w` for `|a/b|` well below 1, by the odd power series.
fn atanh_series(a: &BigInt, b: &BigInt, w: u32) -> BigInt {
    let wu = w as usize;
    let y = (a << wu) / b;
    let y2 = (&y * &y) >> wu;
    let mut sum = y.clone();
    let mut pow = y;
    let mut k: i64 = 1;
    loop {
        pow = (&pow * &y2) >> wu;
        let term = &pow / (2 * k + 1);
        if term.is_zero() {
            break;
        }
        sum += term;
        k += 1;
    }
    sum
}

/// `atan(1/n) * 2^w`.
fn atan_inv_fixed(n: u64, w: u32) -> BigInt {
    let guard = 16usize;
    let mut term = (BigInt::one() << (w as usize + guard)) / n;
    let n2 = BigInt::from(n) * n;
    let mut sum = term.clone();
    let mut k: i64 = 1;
    loop {
        term /= &n2;
        if term.is_zero() {
            break;
        }
        let t = &term / (2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    round_shift(&sum, guard as i64)
}

/// `pi * 2^w` by Machin's formula.
pub(crate) fn pi_fixed(w: u32) -> BigInt {
    let g = w + 8;
    let v = atan_inv_fixed(5, g) * 16 - atan_inv_fixed(239, g) * 4;
    round_shift(&v, 8)
}

/// `ln 2 * 2^w` as `2 atanh(1/3)`.
pub(crate) fn ln2_fixed(w: u32) -> BigInt {
    let g = w + 8;
    let v = atanh_series(&BigInt::one(), &BigInt::from(3), g) * 2;
    round_shift(&v, 8)
}

impl PartialEq for Float {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Float {}

impl PartialOrd for Float {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Float {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // same sign: compare exactly by aligning exponents
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &other.mant << ((other.exp - e) as usize);
        a.cmp(&b)
    }
}

impl fmt::Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Float({})", self.to_decimal_string(20))
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize;
        f.write_str(&self.to_decimal_string(digits.max(1)))
    }
}

fn add_impl(a: &Float, b: &Float, negate_b: bool) -> Float {
    let prec = a.prec.min(b.prec);
    if b.is_zero() {
        return a.with_prec(prec);
    }
    if a.is_zero() {
        let r = b.with_prec(prec);
        return if negate_b { -r } else { r };
    }
    let ta = a.top_exponent();
    let tb = b.top_exponent();
    let gap = prec as i64 + 4;
    let bm = if negate_b { -&b.mant } else { b.mant.clone() };
    if ta > tb + gap {
        // b only affects rounding beyond the guard; nudge by a sticky bit
        let m = (&a.mant << 4usize) + bm.signum();
        return Float::normalize(m, a.exp - 4, prec);
    }
    if tb > ta + gap {
        let m = (&bm << 4usize) + a.mant.signum();
        return Float::normalize(m, b.exp - 4, prec);
    }
    let e = a.exp.min(b.exp);
    let m = (&a.mant << ((a.exp - e) as usize)) + (bm << ((b.exp - e) as usize));
    Float::normalize(m, e, prec)
}

impl<'a> Add<&'a Float> for &'a Float {
    type Output = Float;
    fn add(self, rhs: &'a Float) -> Float {
        add_impl(self, rhs, false)
    }
}

impl<'a> Sub<&'a Float> for &'a Float {
    type Output = Float;
    fn sub(self, rhs: &'a Float) -> Float {
        add_impl(self, rhs, true)
    }
}

impl<'a> Mul<&'a Float> for &'a Float {
    type Output = Float;
    fn mul(self, rhs: &'a Float) -> Float {
        Float::normalize(&self.mant * &rhs.mant, self.exp + rhs.exp, self.prec.min(rhs.prec))
    }
}

impl<'a> Div<&'a Float> for &'a Float {
    type Output = Float;
    fn div(self, rhs: &'a Float) -> Float {
        assert!(!rhs.is_zero(), "division by zero");
        let prec = self.prec.min(rhs.prec);
        if self.is_zero() {
            return Float::zero(prec);
        }
        let shift = (prec as i64 + 4 + bit_len(&rhs.mant) - bit_len(&self.mant)).max(0);
        let num = &self.mant << (shift as usize);
        let (q, r) = num.div_rem(&rhs.mant);
        // sticky bit keeps round-to-nearest honest after truncation
        let q = (q << 1usize) + if r.is_zero() { BigInt::zero() } else { BigInt::from(q_sign(&num, &rhs.mant)) };
        Float::normalize(q, self.exp - rhs.exp - shift - 1, prec)
    }
}

fn q_sign(a: &BigInt, b: &BigInt) -> i32 {
    if a.is_negative() == b.is_negative() {
        1
    } else {
        -1
    }
}

impl Neg for &Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float { mant: -&self.mant, exp: self.exp, prec: self.prec }
    }
}

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float { mant: -self.mant, exp: self.exp, prec: self.prec }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Float> for Float {
            type Output = Float;
            fn $m(self, rhs: Float) -> Float {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Float> for Float {
            type Output = Float;
            fn $m(self, rhs: &'a Float) -> Float {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Float> for &'a Float {
            type Output = Float;
            fn $m(self, rhs: Float) -> Float {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Serialized as a decimal string carrying the working precision.
impl serde::Serialize for Float {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string((self.prec() as f64 * std::f64::consts::LOG10_2) as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 300;

    fn close(a: &Float, b: &Float, bits: i64) -> bool {
        (a - b).abs_below_pow2(-bits)
    }

    #[test]
    fn basic_arithmetic() {
        let a = Float::from_i64(7, P);
        let b = Float::from_i64(3, P);
        assert_eq!((&a + &b).round(), BigInt::from(10));
        assert_eq!((&a * &b).round(), BigInt::from(21));
        let q = &a / &b;
        assert!(close(&(&q * &b), &a, 290));
        assert_eq!(Float::from_i64(-7, P).floor(), BigInt::from(-7));
        assert_eq!((Float::from_i64(-7, P) / b.clone()).floor(), BigInt::from(-3));
        assert_eq!(Float::from_i64(2, P).sqrt().to_decimal_string(12), "1.41421356237");
    }

    #[test]
    fn constants() {
        assert_eq!(Float::pi(P).to_decimal_string(40), "3.141592653589793238462643383279502884197");
        assert_eq!(Float::ln2(P).to_decimal_string(30), "0.693147180559945309417232121458");
        let e = Float::one(P).exp();
        assert_eq!(e.to_decimal_string(30), "2.71828182845904523536028747135");
    }

    #[test]
    fn transcendental_identities() {
        for v in ["0.1", "1.7", "-3.25", "25.5", "1e-8", "-40"] {
            let x = Float::parse_decimal(v, P).unwrap();
            let (s, c) = x.sin_cos();
            assert!(close(&(&s * &s + &c * &c), &Float::one(P), 280), "{v}");
            let ex = x.exp();
            assert!(close(&ex.ln(), &x, 270), "{v}");
            let t = Float::atan2(&s, &c);
            let pi = Float::pi(P);
            let reduced = &x - &(&pi.mul_pow2(1) * &Float::from_bigint(&(&x / &pi.mul_pow2(1)).round(), P));
            assert!(close(&t, &reduced, 270), "{v}");
        }
        // Gauss-Legendre AGM iteration as an independent route to pi
        let mut a = Float::one(P);
        let mut b = Float::from_i64(2, P).sqrt().recip();
        let mut t = Float::from_parts(BigInt::one(), -2, P);
        let mut pw = Float::one(P);
        for _ in 0..12 {
            let an = (&a + &b).mul_pow2(-1);
            b = (&a * &b).sqrt();
            let d = &a - &an;
            t = &t - &(&pw * &d.square());
            pw = pw.mul_pow2(1);
            a = an;
        }
        let pi_gl = (&a + &b).square() / t.mul_pow2(2);
        assert!(close(&pi_gl, &Float::pi(P), 280));
    }

    #[test]
    fn decimal_rendering() {
        let x = Float::parse_decimal("-0.000123456", 100).unwrap();
        assert_eq!(x.to_decimal_string(6), "-0.000123456");
        let y = Float::parse_decimal("123456789", 100).unwrap();
        assert_eq!(y.to_decimal_string(3), "123000000");
        assert_eq!(Float::parse_decimal("1e50", 200).unwrap().to_decimal_string(2), "1.0e50");
        assert!(Float::parse_decimal("1.2.3", 64).is_err());
        assert_eq!(Float::from_f64(0.5, 64).to_f64(), 0.5);
    }

    #[test]
    fn precision_floor() {
        assert!(Precision::new(14).is_err());
        assert!(Precision::new(15).unwrap().bits() >= 83);
    }
}
