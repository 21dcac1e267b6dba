//! Constant-coefficient exterior algebra on ℝ⁶ = ℂ³ with Gaussian-rational coefficients.
//!
//! Generators are ordered e0=dx1, e1=dy1, e2=dx2, e3=dy2, e4=dx3, e5=dy3, so that
//! e0∧…∧e5 = dx1∧dy1∧dx2∧dy2∧dx3∧dy3 integrates to 1 over the unit cell.

use crate::scalar::{q, Gq, Scalar};

pub const GENERATORS: usize = 6;
pub const TOP: usize = (1 << GENERATORS) - 1;

/// A form as coefficients indexed by bitmask of generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub c: Vec<Gq>,
}

impl Form {
    pub fn zero() -> Self {
        Form { c: vec![Gq::zero(); 1 << GENERATORS] }
    }

    pub fn monomial(mask: usize, coeff: Gq) -> Self {
        let mut f = Self::zero();
        f.c[mask] = coeff;
        f
    }

    pub fn one() -> Self {
        Self::monomial(0, Gq::one())
    }

    pub fn add(&self, o: &Self) -> Self {
        Form { c: self.c.iter().zip(&o.c).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Form { c: self.c.iter().zip(&o.c).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scale(&self, s: &Gq) -> Self {
        Form { c: self.c.iter().map(|a| a.times(s)).collect() }
    }

    pub fn conj(&self) -> Self {
        Form { c: self.c.iter().map(|a| a.conj()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.c.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in o.c.iter().enumerate() {
                if cb.is_zero() || a & b != 0 {
                    continue;
                }
                let v = ca.times(cb);
                out.c[a | b] = if wedge_sign(a, b) { out.c[a | b].minus(&v) } else { out.c[a | b].plus(&v) };
            }
        }
        out
    }

    /// Interior product with the real basis vector dual to generator k.
    pub fn interior_basis(&self, k: usize) -> Self {
        let mut out = Self::zero();
        for (a, ca) in self.c.iter().enumerate() {
            if ca.is_zero() || a & (1 << k) == 0 {
                continue;
            }
            let below = (a & ((1 << k) - 1)).count_ones();
            let v = if below % 2 == 1 { ca.negate() } else { ca.clone() };
            out.c[a & !(1 << k)] = out.c[a & !(1 << k)].plus(&v);
        }
        out
    }

    /// Interior product with a real-coordinate vector v = Σ v_k ∂/∂e_k.
    pub fn interior(&self, v: &[Gq; GENERATORS]) -> Self {
        let mut out = Self::zero();
        for (k, vk) in v.iter().enumerate() {
            if !vk.is_zero() {
                out = out.add(&self.interior_basis(k).scale(vk));
            }
        }
        out
    }

    /// ∫ over the unit cell: the top coefficient.
    pub fn integrate(&self) -> Gq {
        self.c[TOP].clone()
    }

    /// Coefficients on the 20 basis 3-forms.
    pub fn to_h3(&self) -> Vec<Gq> {
        h3_masks().iter().map(|&m| self.c[m].clone()).collect()
    }

    pub fn from_h3(v: &[Gq]) -> Self {
        let mut f = Self::zero();
        for (m, x) in h3_masks().iter().zip(v) {
            f.c[*m] = x.clone();
        }
        f
    }
}

/// True when moving the generators of `b` past those of `a` is an odd permutation.
fn wedge_sign(a: usize, b: usize) -> bool {
    let mut inversions = 0;
    for j in 0..GENERATORS {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    inversions % 2 == 1
}

/// Bitmasks with three generators, in increasing order.
pub fn h3_masks() -> Vec<usize> {
    (0..1usize << GENERATORS).filter(|m| m.count_ones() == 3).collect()
}

pub fn dx(a: usize) -> Form {
    Form::monomial(1 << (2 * a), Gq::one())
}

pub fn dy(a: usize) -> Form {
    Form::monomial(1 << (2 * a + 1), Gq::one())
}

/// dz^a = dx^a + i dy^a.
pub fn dz(a: usize) -> Form {
    dx(a).add(&dy(a).scale(&Gq::i()))
}

/// dz̄^a = dx^a − i dy^a.
pub fn dzbar(a: usize) -> Form {
    dx(a).sub(&dy(a).scale(&Gq::i()))
}

/// ∂/∂z^a = ½(∂_x − i∂_y) in real coordinates.
pub fn d_dz(a: usize) -> [Gq; GENERATORS] {
    let mut v: [Gq; GENERATORS] = Default::default();
    v[2 * a] = Gq::real(q(1, 2));
    v[2 * a + 1] = Gq::new(q(0, 1), q(-1, 2));
    v
}

pub fn wedge_all(fs: &[Form]) -> Form {
    fs.iter().fold(Form::one(), |acc, f| acc.wedge(f))
}
