//! Scalar domains: exact rationals, exact Gaussian rationals, complex doubles.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Q = BigRational;
pub type C64 = Complex64;

/// Which concrete scalar domain a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Rational,
    GaussianRational,
    ComplexDouble,
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale by bit length first
        let nb = x.numer().bits() as i64;
        let db = x.denom().bits() as i64;
        let shift = (nb - db).clamp(-1000, 1000);
        let scaled = if shift > 0 {
            x / Q::from_integer(BigInt::one() << shift as usize)
        } else {
            x * Q::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

/// "p/q" for non-integers, "p" for integers.
pub fn render_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

pub fn render_c64(z: C64) -> String {
    format!("({},{})", fmt_f64(z.re), fmt_f64(z.im))
}

/// Locale-free fixed-width scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // collapse -0.0
        "0.000000000000e0".to_string()
    } else {
        format!("{:.12e}", x)
    }
}

pub fn parse_c64(s: &str) -> Option<C64> {
    let s = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = s.split_once(',')?;
    Some(C64::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Exact Gaussian rational re + i im.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Gq {
    pub re: Q,
    pub im: Q,
}

impl Gq {
    pub fn new(re: Q, im: Q) -> Self {
        Gq { re, im }
    }
    pub fn real(re: Q) -> Self {
        Gq { re, im: <Q as Zero>::zero() }
    }
    pub fn i() -> Self {
        Gq { re: <Q as Zero>::zero(), im: <Q as One>::one() }
    }
    pub fn int(re: i64, im: i64) -> Self {
        Gq { re: qi(re), im: qi(im) }
    }
    pub fn conj(&self) -> Self {
        Gq { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn norm_sqr(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Display for Gq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", render_q(&self.re), render_q(&self.im))
    }
}

impl<'a> Add<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn add(self, o: &Gq) -> Gq {
        Gq { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}
impl<'a> Sub<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn sub(self, o: &Gq) -> Gq {
        Gq { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}
impl<'a> Mul<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn mul(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}
impl Neg for &Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq { re: -self.re.clone(), im: -self.im.clone() }
    }
}

/// Field operations shared by every series and matrix routine.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const DOMAIN: Domain;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(x: &Q) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn recip(&self) -> Option<Self>;
    fn to_c64(&self) -> C64;
    fn render(&self) -> String;
    /// exp of a constant; `None` in exact domains.
    fn exp_const(&self) -> Option<Self> {
        None
    }
    /// log of a constant; `None` in exact domains.
    fn ln_const(&self) -> Option<Self> {
        None
    }
    /// Magnitude used for pivoting: larger is better.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    /// Near-zero test used by elimination; exact domains test exactly.
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn from_int(n: i64) -> Self {
        Self::from_q(&qi(n))
    }
    fn div(&self, o: &Self) -> Option<Self> {
        o.recip().map(|r| self.times(&r))
    }
    fn is_one(&self) -> bool {
        self == &Self::one()
    }
}

/// Scalars with a complex conjugation and an imaginary unit.
pub trait ComplexScalar: Scalar {
    fn conjugate(&self) -> Self;
    fn imag_unit() -> Self;
}

impl ComplexScalar for Gq {
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn imag_unit() -> Self {
        Gq::i()
    }
}

impl ComplexScalar for C64 {
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }
}

impl Scalar for Q {
    const DOMAIN: Domain = Domain::Rational;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self.clone()
    }
    fn recip(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(Q::recip(self))
        }
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(self), 0.0)
    }
    fn render(&self) -> String {
        render_q(self)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(&self.abs())
    }
}

impl Scalar for Gq {
    const DOMAIN: Domain = Domain::GaussianRational;
    fn zero() -> Self {
        Gq::default()
    }
    fn one() -> Self {
        Gq::real(<Q as One>::one())
    }
    fn from_q(x: &Q) -> Self {
        Gq::real(x.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if Zero::is_zero(&n) {
            None
        } else {
            Some(Gq { re: &self.re / &n, im: -(&self.im / &n) })
        }
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for C64 {
    const DOMAIN: Domain = Domain::ComplexDouble;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_q(x: &Q) -> Self {
        C64::new(q_to_f64(x), 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn render(&self) -> String {
        render_c64(*self)
    }
    fn exp_const(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn ln_const(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(self.ln())
        }
    }
    fn negligible(&self) -> bool {
        self.norm() < 1e-300
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        for s in ["3/7", "-12/5", "42", "0"] {
            assert_eq!(render_q(&parse_q(s).unwrap()), s);
        }
        assert!(parse_q("1/0").is_none());
    }

    #[test]
    fn gaussian_field() {
        let a = Gq::int(3, -4);
        let r = a.recip().unwrap();
        assert_eq!(a.times(&r), Gq::one());
        assert_eq!(a.norm_sqr(), qi(25));
        assert_eq!(Gq::i().times(&Gq::i()), Gq::int(-1, 0));
    }

    #[test]
    fn complex_render_parse() {
        let z = C64::new(1.5, -0.25);
        assert_eq!(parse_c64(&render_c64(z)).unwrap(), z);
        assert_eq!(render_c64(C64::new(-0.0, 0.0)), "(0.000000000000e0,0.000000000000e0)");
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = Q::from_integer(BigInt::from(10).pow(400)) / Q::from_integer(BigInt::from(10).pow(398));
        assert!((q_to_f64(&big) - 100.0).abs() < 1e-9);
    }
}
