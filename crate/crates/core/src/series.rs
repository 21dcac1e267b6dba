//! Truncated power series and log-series over a [`Scalar`] domain.

use crate::scalar::{Scalar, C64};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("truncation order zero")]
    TruncationZero,
    #[error("zero constant term")]
    ZeroConstantTerm,
    #[error("inner series has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("reversion needs a(0) = 0 and a'(0) != 0")]
    NotRevertible,
    #[error("exp/log of a nonzero constant term in an exact domain")]
    ExactTranscendental,
    #[error("log requires a(0) = 1")]
    LogDomain,
    #[error("log power {0} exceeds the internal cap 6")]
    LogPowerOverflow(usize),
}

pub const MAX_INTERNAL_LOG_POWER: usize = 6;

/// Σ_{m < trunc_order} c_m z^m, coefficients at and beyond `trunc_order` unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> TruncSeries<S> {
    /// Pads with zeros or truncates so that `len == order`.
    pub fn new(mut coeffs: Vec<S>, order: usize) -> Self {
        coeffs.resize(order, S::zero());
        TruncSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(S::one(), order)
    }

    pub fn constant(c: S, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The series `z`.
    pub fn var(order: usize) -> Self {
        Self::new(vec![S::zero(), S::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, m: usize) -> S {
        self.coeffs.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs[..order.min(self.order())].to_vec(), order.min(self.order()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TruncSeries<T> {
        TruncSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|a| a.times(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.negate())
    }

    fn check(a: &Self, b: &Self) -> Result<usize, SeriesError> {
        let n = a.order().min(b.order());
        if n == 0 {
            Err(SeriesError::TruncationZero)
        } else {
            Ok(n)
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        let n = Self::check(self, o)?;
        Ok(TruncSeries { coeffs: (0..n).map(|m| self.coeffs[m].plus(&o.coeffs[m])).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        let n = Self::check(self, o)?;
        Ok(TruncSeries { coeffs: (0..n).map(|m| self.coeffs[m].minus(&o.coeffs[m])).collect() })
    }

    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        let n = Self::check(self, o)?;
        Ok(TruncSeries { coeffs: mul_coeffs(&self.coeffs, &o.coeffs, n) })
    }

    /// Multiplies by z^k, keeping the order.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut c = vec![S::zero(); k.min(n)];
        c.extend(self.coeffs.iter().take(n.saturating_sub(k)).cloned());
        TruncSeries { coeffs: c }
    }

    pub fn reciprocal(&self) -> Result<Self, SeriesError> {
        let n = self.order();
        if n == 0 {
            return Err(SeriesError::TruncationZero);
        }
        let inv0 = self.coeffs[0].recip().ok_or(SeriesError::ZeroConstantTerm)?;
        let mut b: Vec<S> = Vec::with_capacity(n);
        b.push(inv0.clone());
        for m in 1..n {
            let mut acc = S::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc = acc.plus(&self.coeffs[k].times(&b[m - k]));
                }
            }
            b.push(acc.times(&inv0).negate());
        }
        Ok(TruncSeries { coeffs: b })
    }

    pub fn div(&self, o: &Self) -> Result<Self, SeriesError> {
        self.mul(&o.reciprocal()?)
    }

    /// outer(inner(z)); needs inner(0) = 0.
    pub fn compose(&self, inner: &Self) -> Result<Self, SeriesError> {
        let n = Self::check(self, inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let inner = inner.truncate(n);
        let mut acc = TruncSeries::constant(self.coeff(n - 1), n);
        for k in (0..n - 1).rev() {
            acc = acc.mul(&inner)?;
            acc.coeffs[0] = acc.coeffs[0].plus(&self.coeffs[k]);
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let c = (1..n).map(|m| self.coeffs[m].times(&S::from_int(m as i64))).collect();
        // d/dz lowers the known order by one
        Self::new(c, n.saturating_sub(1))
    }

    /// θ = z d/dz.
    pub fn theta(&self) -> Self {
        TruncSeries {
            coeffs: self.coeffs.iter().enumerate().map(|(m, c)| c.times(&S::from_int(m as i64))).collect(),
        }
    }

    /// Compositional inverse by Newton iteration b ← b − (a∘b − z)/(a'∘b).
    pub fn reversion(&self) -> Result<Self, SeriesError> {
        let n = self.order();
        if n < 2 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(SeriesError::NotRevertible);
        }
        let a1inv = self.coeffs[1].recip().ok_or(SeriesError::NotRevertible)?;
        let mut b = TruncSeries::new(vec![S::zero(), a1inv], n);
        let da = self.derivative();
        let mut prec = 2;
        while prec < n {
            prec = (2 * prec).min(n);
            let bp = b.truncate(prec);
            let ab = self.truncate(prec).compose(&bp)?;
            let resid = ab.sub(&TruncSeries::var(prec))?;
            let dab = TruncSeries::new(da.coeffs.clone(), prec).compose(&bp)?;
            let corr = resid.div(&dab)?;
            b = TruncSeries::new(bp.sub(&corr)?.coeffs, n);
        }
        Ok(b)
    }

    /// exp(a); exact domains require a(0) = 0.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let n = self.order();
        if n == 0 {
            return Err(SeriesError::TruncationZero);
        }
        let c0 = if self.coeffs[0].is_zero() {
            S::one()
        } else {
            self.coeffs[0].exp_const().ok_or(SeriesError::ExactTranscendental)?
        };
        let mut b = vec![c0];
        // m b_m = Σ_{k=1}^{m} k a_k b_{m-k}
        for m in 1..n {
            let mut acc = S::zero();
            for k in 1..=m {
                if !self.coeffs[k].is_zero() {
                    acc = acc.plus(&self.coeffs[k].times(&S::from_int(k as i64)).times(&b[m - k]));
                }
            }
            b.push(acc.div(&S::from_int(m as i64)).expect("nonzero integer"));
        }
        Ok(TruncSeries { coeffs: b })
    }

    /// log(a); exact domains require a(0) = 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let n = self.order();
        if n == 0 {
            return Err(SeriesError::TruncationZero);
        }
        let a0 = &self.coeffs[0];
        let c0 = if a0.is_one() {
            S::zero()
        } else if S::DOMAIN == crate::scalar::Domain::ComplexDouble {
            a0.ln_const().ok_or(SeriesError::LogDomain)?
        } else {
            return Err(SeriesError::LogDomain);
        };
        // θ log a = θa / a
        let q = self.theta().div(self)?;
        let mut c = vec![c0];
        for m in 1..n {
            c.push(q.coeffs[m].div(&S::from_int(m as i64)).expect("nonzero integer"));
        }
        Ok(TruncSeries { coeffs: c })
    }

    pub fn eval_c64(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.to_c64();
        }
        acc
    }

    /// Horner evaluation inside the scalar domain.
    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.times(z).plus(c);
        }
        acc
    }

    pub fn to_c64(&self) -> TruncSeries<C64> {
        self.map(|c| c.to_c64())
    }

    pub fn render(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.render()).collect()
    }
}

fn mul_coeffs<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n];
    for (i, ai) in a.iter().enumerate().take(n) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n - i) {
            if !bj.is_zero() {
                out[i + j] = out[i + j].plus(&ai.times(bj));
            }
        }
    }
    out
}

/// Σ_k (log z)^k f_k(z) with `blocks[k] = f_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeries<S> {
    blocks: Vec<TruncSeries<S>>,
}

impl<S: Scalar> LogSeries<S> {
    pub fn new(blocks: Vec<TruncSeries<S>>) -> Result<Self, SeriesError> {
        if blocks.is_empty() {
            return Err(SeriesError::TruncationZero);
        }
        if blocks.len() > MAX_INTERNAL_LOG_POWER + 1 {
            return Err(SeriesError::LogPowerOverflow(blocks.len() - 1));
        }
        let n = blocks.iter().map(|b| b.order()).min().unwrap_or(0);
        if n == 0 {
            return Err(SeriesError::TruncationZero);
        }
        let mut s = LogSeries { blocks: blocks.into_iter().map(|b| b.truncate(n)).collect() };
        s.trim();
        Ok(s)
    }

    pub fn from_series(f: TruncSeries<S>) -> Self {
        LogSeries { blocks: vec![f] }
    }

    /// The pure series `log z`.
    pub fn log_z(order: usize) -> Self {
        LogSeries { blocks: vec![TruncSeries::zero(order), TruncSeries::one(order)] }
    }

    fn trim(&mut self) {
        while self.blocks.len() > 1 && self.blocks.last().map_or(false, |b| b.is_zero()) {
            self.blocks.pop();
        }
    }

    pub fn order(&self) -> usize {
        self.blocks[0].order()
    }

    pub fn max_log_power(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[TruncSeries<S>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> TruncSeries<S> {
        self.blocks.get(k).cloned().unwrap_or_else(|| TruncSeries::zero(self.order()))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.is_zero())
    }

    fn zip(&self, o: &Self, f: impl Fn(&TruncSeries<S>, &TruncSeries<S>) -> Result<TruncSeries<S>, SeriesError>) -> Result<Self, SeriesError> {
        let k = self.blocks.len().max(o.blocks.len());
        let blocks = (0..k).map(|i| f(&self.block(i), &o.block(i))).collect::<Result<Vec<_>, _>>()?;
        Self::new(blocks)
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut s = LogSeries { blocks: self.blocks.iter().map(|b| b.scale(c)).collect() };
        s.trim();
        s
    }

    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        let top = self.max_log_power() + o.max_log_power();
        if top > MAX_INTERNAL_LOG_POWER {
            return Err(SeriesError::LogPowerOverflow(top));
        }
        let n = self.order().min(o.order());
        if n == 0 {
            return Err(SeriesError::TruncationZero);
        }
        let mut blocks = vec![TruncSeries::zero(n); top + 1];
        for (i, a) in self.blocks.iter().enumerate() {
            for (j, b) in o.blocks.iter().enumerate() {
                blocks[i + j] = blocks[i + j].add(&a.mul(b)?)?;
            }
        }
        Self::new(blocks)
    }

    /// Caller-side re-truncation in log power.
    pub fn truncate_log(&self, max_power: usize) -> Self {
        let mut s = LogSeries { blocks: self.blocks.iter().take(max_power + 1).cloned().collect() };
        s.trim();
        s
    }

    /// θ(L^k f) = k L^{k-1} f + L^k θf.
    pub fn theta(&self) -> Self {
        let k = self.blocks.len();
        let mut blocks: Vec<TruncSeries<S>> = self.blocks.iter().map(|b| b.theta()).collect();
        for j in 1..k {
            let extra = self.blocks[j].scale(&S::from_int(j as i64));
            blocks[j - 1] = blocks[j - 1].add(&extra).expect("equal orders");
        }
        let mut s = LogSeries { blocks };
        s.trim();
        s
    }

    pub fn theta_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.theta())
    }

    /// Value at z on the branch where log z = `log_z`.
    pub fn eval_c64(&self, z: C64, log_z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for b in self.blocks.iter().rev() {
            acc = acc * log_z + b.eval_c64(z);
        }
        acc
    }

    pub fn eval(&self, z: &S, log_z: &S) -> S {
        let mut acc = S::zero();
        for b in self.blocks.iter().rev() {
            acc = acc.times(log_z).plus(&b.eval(z));
        }
        acc
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> LogSeries<T> {
        LogSeries { blocks: self.blocks.iter().map(|b| b.map(f)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, Q};

    fn s(v: &[i64], n: usize) -> TruncSeries<Q> {
        TruncSeries::new(v.iter().map(|&x| qi(x)).collect(), n)
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(s(&[1, 1], 3).mul(&s(&[1, -1], 3)).unwrap(), s(&[1, 0, -1], 3));
    }

    #[test]
    fn truncation_dominates() {
        let r = s(&[1, 1], 2).add(&s(&[0, 0, 1], 5)).unwrap();
        assert_eq!(r.order(), 2);
        assert_eq!(r, s(&[1, 1], 2));
    }

    #[test]
    fn zero_order_is_error() {
        assert_eq!(s(&[], 0).add(&s(&[1], 3)), Err(SeriesError::TruncationZero));
    }

    #[test]
    fn log_block_square() {
        let l = LogSeries::<Q>::log_z(4);
        let l2 = l.mul(&l).unwrap();
        assert_eq!(l2.max_log_power(), 2);
        assert_eq!(l2.block(2), s(&[1], 4));
    }

    #[test]
    fn geometric_reciprocal() {
        assert_eq!(s(&[1, -1], 5).reciprocal().unwrap(), s(&[1, 1, 1, 1, 1], 5));
        assert_eq!(s(&[1], 3).reciprocal().unwrap(), s(&[1], 3));
        assert_eq!(s(&[0, 1], 3).reciprocal(), Err(SeriesError::ZeroConstantTerm));
    }

    #[test]
    fn compose_examples() {
        let outer = s(&[1, 1, 1, 1, 1, 1, 1], 7);
        assert_eq!(outer.compose(&s(&[0, 0, 1], 7)).unwrap(), s(&[1, 0, 1, 0, 1, 0, 1], 7));
        let inner = s(&[0, 3, -2, 5], 6);
        assert_eq!(s(&[0, 1], 6).compose(&inner).unwrap(), inner);
        assert_eq!(outer.compose(&s(&[1, 1], 7)), Err(SeriesError::NonzeroConstantTerm));
    }

    #[test]
    fn exp_log_roundtrip() {
        let l = s(&[1, 1], 8).log().unwrap();
        assert_eq!(l.exp().unwrap(), s(&[1, 1], 8));
        // exp(log(1+z)) as a composition exp∘(log(1+z))
        let exp_w = TruncSeries::new((0..8).map(|k| Q::from_integer(1.into()) / Q::from_integer(factorial(k).into())).collect(), 8);
        assert_eq!(exp_w.compose(&l).unwrap(), s(&[1, 1], 8));
    }

    fn factorial(k: usize) -> i64 {
        (1..=k as i64).product()
    }

    #[test]
    fn exp_definition() {
        let e = s(&[0, 1], 4).exp().unwrap();
        assert_eq!(e, TruncSeries::new(vec![qi(1), qi(1), q(1, 2), q(1, 6)], 4));
    }

    #[test]
    fn exact_transcendental_rejected() {
        assert_eq!(s(&[2, 1], 4).exp(), Err(SeriesError::ExactTranscendental));
        assert_eq!(s(&[2, 1], 4).log(), Err(SeriesError::LogDomain));
    }

    #[test]
    fn float_exp_log_constant() {
        let a = TruncSeries::new(vec![C64::new(2.0, 0.5), C64::new(1.0, 0.0)], 6);
        let back = a.log().unwrap().exp().unwrap();
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn reversion_examples() {
        let r = s(&[0, 1, 1], 5).reversion().unwrap();
        assert_eq!(r, s(&[0, 1, -1, 2, -5], 5));
        assert_eq!(s(&[0, 1], 6).reversion().unwrap(), s(&[0, 1], 6));
        assert_eq!(s(&[1, 1], 6).reversion(), Err(SeriesError::NotRevertible));
    }

    #[test]
    fn theta_rules() {
        let zm = s(&[0, 0, 0, 1], 5);
        assert_eq!(zm.theta(), s(&[0, 0, 0, 3], 5));
        let t = LogSeries::<Q>::log_z(4).theta();
        assert_eq!(t, LogSeries::from_series(s(&[1], 4)));
    }

    #[test]
    fn log_power_cap() {
        let l3 = LogSeries::new(vec![s(&[0], 3), s(&[0], 3), s(&[0], 3), s(&[1], 3)]).unwrap();
        let l6 = l3.mul(&l3).unwrap();
        assert_eq!(l6.max_log_power(), 6);
        assert_eq!(l6.mul(&LogSeries::log_z(3)), Err(SeriesError::LogPowerOverflow(7)));
    }
}
