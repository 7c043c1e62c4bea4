//! Double-double arithmetic (about 106 significand bits).
//!
//! Used only by the extended-precision oracle paths, where an expansion
//! remainder falls below the resolution of `f64` (for example the
//! `n^-6` remainder of a smooth test function at `n = 64`).

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };
    pub const PI: DD = DD {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const FRAC_PI_2: DD = DD {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123233995736766e-17,
    };
    pub const LN2: DD = DD {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        DD { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact quotient `p / q` of two integers representable in `f64`.
    pub fn ratio(p: f64, q: f64) -> Self {
        DD::from_f64(p) / DD::from_f64(q)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                DD::ZERO
            } else {
                DD::from_f64(f64::NAN)
            };
        }
        // One Newton step on top of the f64 root (Karp's trick).
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let diff = self - DD::from_f64(ax).sqr();
        DD::from_f64(ax) + DD::from_f64(diff.hi * (x * 0.5))
    }

    /// `self · 2^e`, exact unless the result leaves the normal range.
    pub fn ldexp(self, e: i32) -> Self {
        let mut out = self;
        let mut e = e;
        while e != 0 {
            let step = e.clamp(-1000, 1000);
            let f = 2f64.powi(step);
            out = DD {
                hi: out.hi * f,
                lo: out.lo * f,
            };
            e -= step;
        }
        out
    }

    pub fn powi(self, mut k: u32) -> Self {
        let mut base = self;
        let mut acc = DD::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return DD::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DD::ZERO;
        }
        // x = k ln2 + r, then exp(r) = exp(r / 2^10)^(2^10).
        let k = (self.hi / DD::LN2.hi).round();
        let r = self - DD::LN2.mul_f64(k);
        let r = r.mul_f64(1.0 / 1024.0);
        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        loop {
            term = term * r / DD::from_f64(i);
            sum += term;
            if term.hi.abs() < 1e-34 {
                break;
            }
            i += 1.0;
        }
        // expm1 squaring: (1+s)^2 - 1 = 2s + s^2 keeps the small part accurate.
        for _ in 0..10 {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        let e = sum + DD::ONE;
        DD {
            hi: e.hi * 2f64.powi(k as i32),
            lo: e.lo * 2f64.powi(k as i32),
        }
    }

    fn sin_cos_reduced(r: DD) -> (DD, DD) {
        let r2 = r.sqr();
        let mut s = r;
        let mut term = r;
        let mut i = 1.0;
        loop {
            term = -(term * r2) / DD::from_f64((i + 1.0) * (i + 2.0));
            s += term;
            i += 2.0;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        let mut c = DD::ONE;
        let mut term = DD::ONE;
        let mut i = 0.0;
        loop {
            term = -(term * r2) / DD::from_f64((i + 1.0) * (i + 2.0));
            c += term;
            i += 2.0;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        (s, c)
    }

    /// Returns `(sin x, cos x)`. Intended for moderate arguments (|x| < 1e6).
    pub fn sin_cos(self) -> (DD, DD) {
        let k = (self.hi / DD::FRAC_PI_2.hi).round();
        let r = self - DD::FRAC_PI_2.mul_f64(k);
        let (s, c) = DD::sin_cos_reduced(r);
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn cos(self) -> DD {
        self.sin_cos().1
    }

    pub fn sin(self) -> DD {
        self.sin_cos().0
    }
}

impl From<f64> for DD {
    fn from(x: f64) -> Self {
        DD::from_f64(x)
    }
}

impl Neg for DD {
    type Output = DD;
    #[inline]
    fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DD {
    type Output = DD;
    #[inline]
    fn add(self, b: DD) -> DD {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        DD { hi, lo }
    }
}

impl Sub for DD {
    type Output = DD;
    #[inline]
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    #[inline]
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from_f64(q3)
    }
}

impl AddAssign for DD {
    fn add_assign(&mut self, b: DD) {
        *self = *self + b;
    }
}

impl SubAssign for DD {
    fn sub_assign(&mut self, b: DD) {
        *self = *self - b;
    }
}

impl MulAssign for DD {
    fn mul_assign(&mut self, b: DD) {
        *self = *self * b;
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &DD) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

/// Complex number over [`DD`], with just the operations the oracle paths use.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DDComplex {
    pub re: DD,
    pub im: DD,
}

impl DDComplex {
    pub fn new(re: DD, im: DD) -> Self {
        DDComplex { re, im }
    }

    pub fn from_real(re: DD) -> Self {
        DDComplex { re, im: DD::ZERO }
    }

    pub fn from_c64(z: num_complex::Complex64) -> Self {
        DDComplex::new(DD::from_f64(z.re), DD::from_f64(z.im))
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Modulus, rounded to `f64`.
    pub fn norm(self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn scale(self, s: DD) -> Self {
        DDComplex {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn recip(self) -> Self {
        let d = self.re.sqr() + self.im.sqr();
        DDComplex {
            re: self.re / d,
            im: -self.im / d,
        }
    }
}

impl Add for DDComplex {
    type Output = DDComplex;
    fn add(self, b: DDComplex) -> DDComplex {
        DDComplex {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for DDComplex {
    type Output = DDComplex;
    fn sub(self, b: DDComplex) -> DDComplex {
        DDComplex {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Mul for DDComplex {
    type Output = DDComplex;
    fn mul(self, b: DDComplex) -> DDComplex {
        DDComplex {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl Div for DDComplex {
    type Output = DDComplex;
    fn div(self, b: DDComplex) -> DDComplex {
        self * b.recip()
    }
}

impl Neg for DDComplex {
    type Output = DDComplex;
    fn neg(self) -> DDComplex {
        DDComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign for DDComplex {
    fn add_assign(&mut self, b: DDComplex) {
        *self = *self + b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 50-digit arithmetic.
    #[test]
    fn transcendental_values() {
        let c = DD::from_f64(0.3).cos();
        assert!((c - DD::new(0.955336489125606, 4.1935600297907467e-17)).abs().hi < 1e-30);
        let e = DD::from_f64(-2.89).exp();
        let want = DD::new(0.05557621261148306, 3.275168506061039e-18);
        assert!(((e - want) / want).abs().hi < 1e-29, "{e:?}");
        let s = DD::from_f64(2.0).sqrt();
        let back = s * s - DD::from_f64(2.0);
        assert!(back.abs().hi < 1e-31);
    }

    #[test]
    fn sin_cos_identity() {
        for &x in &[0.1, 1.0, 2.5, -3.7, 7.9, 12.0] {
            let (s, c) = DD::from_f64(x).sin_cos();
            let one = s.sqr() + c.sqr();
            assert!((one - DD::ONE).abs().hi < 1e-30, "x = {x}");
            assert!((s.hi - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn division_roundtrip() {
        let a = DD::from_f64(1.0) / DD::from_f64(3.0);
        let back = a * DD::from_f64(3.0) - DD::ONE;
        assert!(back.abs().hi < 1e-31);
    }
}
