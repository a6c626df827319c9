//! Complex-analytic data of `E(C)`: period lattice by AGM, the
//! Weierstrass parametrization, and the archimedean local height as a
//! function of the elliptic logarithm.

use num_bigint::BigInt;

use super::EllipticCurve;
use crate::numeric::{agm, Complex, Float};

/// Lattice `Z w1 + Z w2` of the invariant differential `dx / (2y + a1 x + a3)`
/// with `w1` real positive and `tau = w2 / w1` in the upper half plane.
#[derive(Clone, Debug)]
pub struct Periods {
    pub w1: Float,
    pub w2: Complex,
    pub tau: Complex,
    /// Number of connected components of `E(R)`.
    pub real_components: u32,
}

fn cubic_coeffs(e: &EllipticCurve) -> [f64; 4] {
    let inv = e.invariants();
    let f = |v: &BigInt| num_traits::ToPrimitive::to_f64(v).unwrap();
    [4.0, f(&inv.b2), 2.0 * f(&inv.b4), f(&inv.b6)]
}

/// Real roots (ascending, f64 accuracy) of `4x^3 + b2 x^2 + 2 b4 x + b6`.
pub(crate) fn real_two_torsion_f64(e: &EllipticCurve) -> Vec<f64> {
    let [a, b, c, d] = cubic_coeffs(e);
    let f = |x: f64| ((a * x + b) * x + c) * x + d;
    let bound = 1.0 + [b, c, d].iter().map(|v| v.abs()).fold(0.0, f64::max) / a;
    let mut cuts = vec![-bound];
    // critical points of the cubic
    let disc = 4.0 * b * b - 12.0 * a * c;
    if disc > 0.0 {
        let s = disc.sqrt();
        let mut c1 = (-2.0 * b - s) / (6.0 * a);
        let mut c2 = (-2.0 * b + s) / (6.0 * a);
        if c1 > c2 {
            std::mem::swap(&mut c1, &mut c2);
        }
        cuts.push(c1);
        cuts.push(c2);
    }
    cuts.push(bound);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (1.0 + x.abs()));
    roots
}

/// Refine a root of the 2-division cubic to full precision by Newton.
fn refine_root(e: &EllipticCurve, x0: f64, prec: u32) -> Float {
    let inv = e.invariants();
    let b2 = Float::from_bigint(&inv.b2, prec);
    let b4 = Float::from_bigint(&inv.b4, prec).mul_i64(2);
    let b6 = Float::from_bigint(&inv.b6, prec);
    let mut x = Float::from_f64(x0, prec);
    let steps = 4 + (prec as f64 / 40.0).log2().ceil().max(0.0) as usize;
    for _ in 0..steps {
        let fx = &(&(&(&x.mul_i64(4) + &b2) * &x) + &b4) * &x + &b6;
        let dfx = &(&x.square().mul_i64(12) + &(&b2 * &x).mul_i64(2)) + &b4;
        if dfx.is_zero() {
            break;
        }
        x = &x - &(&fx / &dfx);
    }
    x
}

/// Period lattice at binary precision `prec`.
pub fn periods(e: &EllipticCurve, prec: u32) -> Periods {
    let w = prec + 32;
    let pi = Float::pi(w);
    let roots = real_two_torsion_f64(e);
    let out = if e.discriminant() > &BigInt::from(0) {
        assert_eq!(roots.len(), 3, "positive discriminant needs three real roots");
        let e3 = refine_root(e, roots[0], w);
        let e2 = refine_root(e, roots[1], w);
        let e1 = refine_root(e, roots[2], w);
        let s13 = (&e1 - &e3).sqrt();
        let s12 = (&e1 - &e2).sqrt();
        let s23 = (&e2 - &e3).sqrt();
        let w1 = &pi / &agm(&s13, &s12).unwrap();
        let w2i = &pi / &agm(&s13, &s23).unwrap();
        let w2 = Complex::new(Float::zero(w), w2i);
        Periods { tau: &w2 / &Complex::from_real(w1.clone()), w1, w2, real_components: 2 }
    } else {
        assert_eq!(roots.len(), 1, "negative discriminant needs one real root");
        let inv = e.invariants();
        let e1 = refine_root(e, roots[0], w);
        let b2 = Float::from_bigint(&inv.b2, w);
        let b4 = Float::from_bigint(&inv.b4, w);
        let a = &e1.mul_i64(3) + &b2.mul_pow2(-2);
        let b = (&(&e1.square().mul_i64(3) + &(&b2.mul_pow2(-1) * &e1)) + &b4.mul_pow2(-1)).sqrt();
        let two_sqrt_b = b.sqrt().mul_pow2(1);
        let w1 = &pi.mul_pow2(1) / &agm(&two_sqrt_b, &(&b.mul_pow2(1) + &a).sqrt()).unwrap();
        let im = &pi / &agm(&two_sqrt_b, &(&b.mul_pow2(1) - &a).sqrt()).unwrap();
        let w2 = Complex::new(-&w1.mul_pow2(-1), im);
        Periods { tau: &w2 / &Complex::from_real(w1.clone()), w1, w2, real_components: 1 }
    };
    Periods {
        w1: out.w1.with_prec(prec),
        w2: out.w2.with_prec(prec),
        tau: out.tau.with_prec(prec),
        real_components: out.real_components,
    }
}

impl Periods {
    pub fn prec(&self) -> u32 {
        self.w1.prec()
    }

    /// Write `z = a w1 + b w2` with real `a, b`.
    pub fn lattice_coords(&self, z: &Complex) -> (Float, Float) {
        let b = &z.im / &self.w2.im;
        let a = &(&z.re - &(&b * &self.w2.re)) / &self.w1;
        (a, b)
    }

    /// Representative of `z` mod the lattice with coordinates in `[0, 1)^2`.
    pub fn reduce(&self, z: &Complex) -> Complex {
        let prec = z.prec();
        let (a, b) = self.lattice_coords(z);
        let fa = Float::from_bigint(&a.floor(), prec);
        let fb = Float::from_bigint(&b.floor(), prec);
        let w1 = Complex::from_real(self.w1.clone());
        z - &(&w1.scale(&fa) + &self.w2.scale(&fb))
    }

    /// Distance from `z` to the nearest lattice point (among the four
    /// corners of the reduced cell and their neighbours).
    pub fn distance_to_lattice(&self, z: &Complex) -> Float {
        let r = self.reduce(z);
        let w1 = Complex::from_real(self.w1.clone());
        let mut best: Option<Float> = None;
        for i in -1..=2i64 {
            for j in -1..=2i64 {
                let corner = &w1.mul_i64(i) + &self.w2.mul_i64(j);
                let d = (&r - &corner).abs();
                best = Some(match best {
                    Some(b) if b <= d => b,
                    _ => d,
                });
            }
        }
        best.unwrap()
    }

    /// `c4` and `c6` recovered from the lattice through Eisenstein series.
    pub fn invariants_from_lattice(&self) -> (Float, Float) {
        let prec = self.prec();
        let q = self.tau.exp_2pi_i();
        let mut e4 = Complex::one(prec);
        let mut e6 = Complex::one(prec);
        let mut qn = Complex::one(prec);
        let limit = -(prec as i64) - 8;
        for n in 1..100_000i64 {
            qn = &qn * &q;
            let qa = qn.abs();
            if qa.top_exponent() < limit - 40 {
                break;
            }
            let term = &qn / &(&Complex::one(prec) - &qn);
            // sum_n sigma_k(n) q^n = sum_n n^k q^n / (1 - q^n)
            e4 = &e4 + &term.mul_i64(240 * n.pow(3));
            e6 = &e6 - &term.mul_i64(504 * n.pow(5));
        }
        let two_pi_over_w1 = &Float::pi(prec).mul_pow2(1) / &self.w1;
        let s4 = two_pi_over_w1.square().square();
        let s6 = &s4 * &two_pi_over_w1.square();
        // c4 = 12 g2 = (2 pi / w1)^4 E4, c6 = 216 g3 = (2 pi / w1)^6 E6
        (&e4.re * &s4, &e6.re * &s6)
    }
}

/// Reduce `z / w1` to `w = a + b tau` with `-1/2 <= b < 1/2` and return
/// `(u, q, b)` with `u = e^{2 pi i w}`, `q = e^{2 pi i tau}`.
fn normalized_u(p: &Periods, z: &Complex) -> (Complex, Complex, Float) {
    let prec = z.prec();
    let (a, b) = p.lattice_coords(z);
    let half = Float::from_parts(BigInt::from(1), -1, prec);
    let nb = (&b + &half).floor();
    let b = &b - &Float::from_bigint(&nb, prec);
    let a = &a - &Float::from_bigint(&a.floor(), prec);
    let w = &Complex::from_real(a) + &p.tau.scale(&b);
    (w.exp_2pi_i(), p.tau.exp_2pi_i(), b)
}

/// `(x, y)` on `E(C)` for the elliptic logarithm `z`, via the q-expansions
/// of `wp` and `wp'`. Panics for `z` on the lattice.
pub fn weierstrass_point(e: &EllipticCurve, p: &Periods, z: &Complex) -> (Complex, Complex) {
    let prec = z.prec().min(p.prec());
    let (u, q, _) = normalized_u(p, z);
    let one = Complex::one(prec);
    let limit = -(prec as i64) - 16;
    // wp = (2 pi i / w1)^2 [1/12 + sum_{n in Z} q^n u / (1 - q^n u)^2 - 2 sum_{n>=1} q^n / (1 - q^n)^2]
    // wp' = (2 pi i / w1)^3 [sum_{n>=0} f(q^n u) - sum_{n>=1} f(q^n / u)], f(v) = v (1 + v) / (1 - v)^3
    let f2 = |v: &Complex| v / &(&one - v).square();
    let f3 = |v: &Complex| &(v * &(&one + v)) / &(&(&one - v).square() * &(&one - v));
    let uinv = u.recip();
    let mut s2 = &Complex::from_real(Float::one(prec).div_i64(12)) + &f2(&u);
    let mut s3 = f3(&u);
    let mut qn = one.clone();
    for _ in 1..1_000_000 {
        qn = &qn * &q;
        if qn.abs().top_exponent() < limit - 8 {
            break;
        }
        let a = &qn * &u;
        let b = &qn * &uinv;
        s2 = &(&(&s2 + &f2(&a)) + &f2(&b)) - &f2(&qn).mul_i64(2);
        s3 = &(&s3 + &f3(&a)) - &f3(&b);
    }
    let c = Complex::new(Float::zero(prec), &Float::pi(prec).mul_pow2(1) / &p.w1);
    let c2 = c.square();
    let c3 = &c2 * &c;
    let wp = &c2 * &s2;
    let wpd = &c3 * &s3;
    let inv = e.invariants();
    let [a1, _, a3, _, _] = e.a();
    let x = &wp - &Complex::from_real(Float::from_bigint(&inv.b2, prec).div_i64(12));
    let a1f = Float::from_bigint(a1, prec);
    let a3f = Complex::from_real(Float::from_bigint(a3, prec));
    let y = (&(&wpd - &x.scale(&a1f)) - &a3f).mul_pow2(-1);
    (x, y)
}

/// Archimedean local height of the point with elliptic logarithm `z`, in the
/// normalization `lambda(P) = 1/2 log|x(P)| + o(1)` near the origin.
pub fn analytic_local_height(e: &EllipticCurve, p: &Periods, z: &Complex) -> Float {
    let prec = z.prec().min(p.prec());
    let (u, q, b) = normalized_u(p, z);
    let one = Complex::one(prec);
    // t = Im(w) / Im(tau) in [0, 1): w -> w + tau, u -> u q when negative
    let (u, t) = if b.is_negative() { (&u * &q, &b + &Float::one(prec)) } else { (u, b) };
    let b2 = &(&t.square() - &t) + &Float::one(prec).div_i64(6);
    let log_q = q.abs().ln();
    let mut lam = -&(&b2 * &log_q).mul_pow2(-1);
    lam = &lam - &(&one - &u).abs().ln();
    let uinv = u.recip();
    let mut qn = one.clone();
    let limit = -(prec as i64) - 16;
    for _ in 1..1_000_000 {
        qn = &qn * &q;
        if qn.abs().top_exponent() < limit {
            break;
        }
        let t1 = (&one - &(&qn * &u)).abs();
        let t2 = (&one - &(&qn * &uinv)).abs();
        lam = &lam - &(&t1 * &t2).ln();
    }
    // the series is the model-free normalization; shift by log|Delta| / 12
    let disc = Float::from_bigint(e.discriminant(), prec).abs();
    &lam + &disc.ln().div_i64(12)
}
