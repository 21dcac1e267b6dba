//! Double-double real and complex arithmetic (about 32 significant digits).
//!
//! Used where a finite-difference stencil would otherwise drown in f64 rounding.

use crate::scalar::{q_to_f64, Scalar, C64, Q};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
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

pub const DD_PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
pub const DD_LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };

impl Dd {
    pub const fn new(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }

    pub fn from_q(x: &Q) -> Self {
        let hi = q_to_f64(x);
        match Q::from_float(hi) {
            Some(h) => Dd { hi, lo: q_to_f64(&(x - h)) },
            None => Dd::new(hi),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Dd::new(1.0) / self
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::new(1.0);
        }
        let k = (self.hi / DD_LN2.hi).round();
        let r = self - DD_LN2 * Dd::new(k);
        // e^r = (e^{r/1024})^1024
        let s = r.ldexp(-10);
        let mut term = Dd::new(1.0);
        let mut sum = Dd::new(1.0);
        for n in 1..20 {
            term = term * s / Dd::new(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum.sqr();
        }
        sum.ldexp(k as i32)
    }

    /// (sin x, cos x).
    pub fn sin_cos(self) -> (Self, Self) {
        let half_pi = DD_PI.ldexp(-1);
        let k = (self.hi / half_pi.hi).round();
        let r = self - half_pi * Dd::new(k);
        let s = r.ldexp(-6);
        let mut sn = Dd::default();
        let mut term = s;
        let mut n = 1;
        while n < 40 {
            sn = sn + term;
            term = -term * s * s / Dd::new(((n + 1) * (n + 2)) as f64);
            n += 2;
        }
        let mut cs = (Dd::new(1.0) - sn * sn).sqrt();
        // double-angle six times
        for _ in 0..6 {
            let s2 = (sn * cs).ldexp(1);
            let c2 = cs * cs - sn * sn;
            sn = s2;
            cs = c2;
        }
        match (k as i64).rem_euclid(4) {
            0 => (sn, cs),
            1 => (cs, -sn),
            2 => (-sn, -cs),
            _ => (-cs, sn),
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::default();
        }
        let x = Dd::new(self.hi.sqrt());
        // one Newton step doubles the precision
        x + (self - x * x) / x.ldexp(1)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex double-double.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }
    pub fn from_c64(z: C64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }
    pub fn to_c64_(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }
    pub fn conj(self) -> Self {
        Cdd { re: self.re, im: -self.im }
    }
    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }
    pub fn exp(self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Cdd { re: m * c, im: m * s }
    }
    pub fn scale(self, x: Dd) -> Self {
        Cdd { re: self.re * x, im: self.im * x }
    }
    pub fn i() -> Self {
        Cdd { re: Dd::default(), im: Dd::new(1.0) }
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
}
impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re - o.re, im: self.im - o.im }
    }
}
impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}
impl Neg for Cdd {
    type Output = Cdd;
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}
impl Div for Cdd {
    type Output = Cdd;
    fn div(self, o: Cdd) -> Cdd {
        let d = o.norm_sqr();
        let n = self * o.conj();
        Cdd { re: n.re / d, im: n.im / d }
    }
}

impl Scalar for Cdd {
    const DOMAIN: crate::scalar::Domain = crate::scalar::Domain::ComplexDouble;
    fn zero() -> Self {
        Cdd::default()
    }
    fn one() -> Self {
        Cdd { re: Dd::new(1.0), im: Dd::default() }
    }
    fn from_q(x: &Q) -> Self {
        Cdd { re: Dd::from_q(x), im: Dd::default() }
    }
    fn is_zero(&self) -> bool {
        self.re.hi == 0.0 && self.im.hi == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        *self + *o
    }
    fn minus(&self, o: &Self) -> Self {
        *self - *o
    }
    fn times(&self, o: &Self) -> Self {
        *self * *o
    }
    fn negate(&self) -> Self {
        -*self
    }
    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Cdd::one() / *self)
        }
    }
    fn to_c64(&self) -> C64 {
        self.to_c64_()
    }
    fn render(&self) -> String {
        crate::scalar::render_c64(self.to_c64_())
    }
}
