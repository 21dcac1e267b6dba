//! Sparse multivariate polynomials over Gaussian rationals, truncated by total degree.

use crate::scalar::{q, Gq, Scalar};
use std::collections::BTreeMap;

pub type Exps = Vec<u8>;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub nvars: usize,
    pub max_deg: u32,
    pub terms: BTreeMap<Exps, Gq>,
}

fn deg(e: &Exps) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

impl Poly {
    pub fn zero(nvars: usize, max_deg: u32) -> Self {
        Poly { nvars, max_deg, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, max_deg: u32, c: Gq) -> Self {
        let mut p = Self::zero(nvars, max_deg);
        p.insert(vec![0; nvars], c);
        p
    }

    pub fn monomial(nvars: usize, max_deg: u32, e: Exps, c: Gq) -> Self {
        let mut p = Self::zero(nvars, max_deg);
        p.insert(e, c);
        p
    }

    fn insert(&mut self, e: Exps, c: Gq) {
        if deg(&e) > self.max_deg || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                *x = x.plus(&c);
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn coeff(&self, e: &[u8]) -> Gq {
        self.terms.get(e).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn constant_term(&self) -> Gq {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars, self.max_deg.min(o.max_deg));
        for (e, c) in self.terms.iter().chain(o.terms.iter()) {
            p.insert(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Gq::int(-1, 0)))
    }

    pub fn scale(&self, s: &Gq) -> Self {
        let mut p = Self::zero(self.nvars, self.max_deg);
        for (e, c) in &self.terms {
            p.insert(e.clone(), c.times(s));
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars, self.max_deg.min(o.max_deg));
        for (ea, ca) in &self.terms {
            let da = deg(ea);
            for (eb, cb) in &o.terms {
                if da + deg(eb) > p.max_deg {
                    continue;
                }
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.insert(e, ca.times(cb));
            }
        }
        p
    }

    pub fn with_max_deg(&self, d: u32) -> Self {
        let mut p = Self::zero(self.nvars, d);
        for (e, c) in &self.terms {
            p.insert(e.clone(), c.clone());
        }
        p
    }

    /// ∂/∂x_i; the truncation degree drops by one.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars, self.max_deg.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            p.insert(f, c.times(&Gq::int(e[i] as i64, 0)));
        }
        p
    }

    /// The mixed partial ∂^{idx} at the origin.
    pub fn deriv_at_zero(&self, idx: &[usize]) -> Gq {
        let mut e = vec![0u8; self.nvars];
        for &i in idx {
            e[i] += 1;
        }
        let mult: i64 = e.iter().map(|&k| (1..=k as i64).product::<i64>()).product();
        self.coeff(&e).times(&Gq::int(mult, 0))
    }

    /// Complex conjugate when the variables are (τ, τ̄) in two halves.
    pub fn conj_swap(&self) -> Self {
        let h = self.nvars / 2;
        let mut p = Self::zero(self.nvars, self.max_deg);
        for (e, c) in &self.terms {
            let mut f = e[h..].to_vec();
            f.extend_from_slice(&e[..h]);
            p.insert(f, c.conj());
        }
        p
    }

    /// −log(P/P(0)) to the truncation degree.
    pub fn neg_log_normalized(&self) -> Option<Self> {
        let c0 = self.constant_term();
        let inv = c0.recip()?;
        let one = Self::constant(self.nvars, self.max_deg, Gq::one());
        let x = self.scale(&inv).sub(&one);
        let mut out = Self::zero(self.nvars, self.max_deg);
        let mut pw = one;
        for n in 1..=self.max_deg as i64 {
            pw = pw.mul(&x);
            if pw.is_zero() {
                break;
            }
            let sign = if n % 2 == 1 { -1 } else { 1 };
            out = out.add(&pw.scale(&Gq::real(q(sign, n))));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_of_product_is_sum() {
        let n = 2;
        let x = Poly::monomial(n, 4, vec![1, 0], Gq::one());
        let y = Poly::monomial(n, 4, vec![0, 1], Gq::int(0, 1));
        let one = Poly::constant(n, 4, Gq::int(3, 0));
        let a = one.add(&x);
        let b = one.add(&y);
        let lhs = a.mul(&b).neg_log_normalized().unwrap();
        let rhs = a.neg_log_normalized().unwrap().add(&b.neg_log_normalized().unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_matches_extraction() {
        let p = Poly::monomial(2, 5, vec![2, 1], Gq::int(3, 0));
        assert_eq!(p.deriv_at_zero(&[0, 0, 1]), Gq::int(6, 0));
        assert_eq!(p.derivative(0).derivative(0).derivative(1).constant_term(), Gq::int(6, 0));
    }

    #[test]
    fn conj_swap_involution() {
        let p = Poly::monomial(2, 3, vec![1, 2], Gq::int(1, 2));
        assert_eq!(p.conj_swap().coeff(&[2, 1]), Gq::int(1, -2));
        assert_eq!(p.conj_swap().conj_swap(), p);
    }
}
