use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::float::Float;

/// Complex number over [`Float`]; results carry the smaller operand precision.
#[derive(Clone, PartialEq, serde::Serialize)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Complex {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Complex {
        Complex::new(Float::zero(prec), Float::zero(prec))
    }

    pub fn one(prec: u32) -> Complex {
        Complex::new(Float::one(prec), Float::zero(prec))
    }

    pub fn i(prec: u32) -> Complex {
        Complex::new(Float::zero(prec), Float::one(prec))
    }

    pub fn from_real(re: Float) -> Complex {
        let prec = re.prec();
        Complex::new(re, Float::zero(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().min(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Complex {
        Complex::new(self.re.with_prec(prec), self.im.with_prec(prec))
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Float {
        &self.re.square() + &self.im.square()
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Float {
        Float::atan2(&self.im, &self.re)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn scale(&self, k: &Float) -> Complex {
        Complex::new(&self.re * k, &self.im * k)
    }

    pub fn mul_i64(&self, k: i64) -> Complex {
        Complex::new(self.re.mul_i64(k), self.im.mul_i64(k))
    }

    pub fn mul_pow2(&self, k: i64) -> Complex {
        Complex::new(self.re.mul_pow2(k), self.im.mul_pow2(k))
    }

    pub fn square(&self) -> Complex {
        self * self
    }

    pub fn recip(&self) -> Complex {
        let n = self.norm_sqr();
        Complex::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn exp(&self) -> Complex {
        let r = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Complex::new(&r * &c, &r * &s)
    }

    /// `exp(2 pi i z)`.
    pub fn exp_2pi_i(&self) -> Complex {
        let two_pi = Float::pi(self.prec()).mul_pow2(1);
        let arg = Complex::new(-(&two_pi * &self.im), &two_pi * &self.re);
        arg.exp()
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Complex {
        let prec = self.prec();
        if self.is_zero() {
            return Complex::zero(prec);
        }
        let r = self.abs();
        let re = (&r + &self.re).mul_pow2(-1).sqrt();
        let im_mag = (&r - &self.re).mul_pow2(-1).sqrt();
        let im = if self.im.is_negative() { -im_mag } else { im_mag };
        Complex::new(re, im)
    }

    pub fn ln(&self) -> Complex {
        Complex::new(self.abs().ln(), self.arg())
    }

    pub fn powi(&self, n: u64) -> Complex {
        let mut acc = Complex::one(self.prec());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            n >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?} i)", self.re, self.im)
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, rhs: &'a Complex) -> Complex {
        Complex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, rhs: &'a Complex) -> Complex {
        Complex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, rhs: &'a Complex) -> Complex {
        Complex::new(&(&self.re * &rhs.re) - &(&self.im * &rhs.im), &(&self.re * &rhs.im) + &(&self.im * &rhs.re))
    }
}

impl<'a> Div<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn div(self, rhs: &'a Complex) -> Complex {
        let n = rhs.norm_sqr();
        let re = &(&self.re * &rhs.re) + &(&self.im * &rhs.im);
        let im = &(&self.im * &rhs.re) - &(&self.re * &rhs.im);
        Complex::new(&re / &n, &im / &n)
    }
}

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-&self.re, -&self.im)
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: &'a Complex) -> Complex {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Complex> for &'a Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_identity() {
        let p = 200;
        let pi = Float::pi(p);
        let z = Complex::new(Float::zero(p), pi).exp();
        assert!((&z.re + &Float::one(p)).abs_below_pow2(-190));
        assert!(z.im.abs_below_pow2(-190));
    }

    #[test]
    fn sqrt_and_division() {
        let p = 200;
        let z = Complex::new(Float::from_i64(-3, p), Float::from_i64(4, p));
        let r = z.sqrt();
        assert_eq!(r.re.round(), 1.into());
        assert_eq!(r.im.round(), 2.into());
        let w = &z / &r;
        assert!((&(&w * &r) - &z).abs().abs_below_pow2(-180));
        let l = z.ln();
        assert!((&l.exp() - &z).abs().abs_below_pow2(-180));
    }
}
