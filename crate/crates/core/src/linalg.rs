//! Dense matrices over a [`Scalar`] domain with exact elimination.

use crate::scalar::{Scalar, C64};
use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_cols(cols: &[Vec<S>]) -> Self {
        let r = cols.first().map_or(0, |c| c.len());
        Self::from_fn(r, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|a| a.times(c))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].plus(&a.times(b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !vj.is_zero() {
                        acc = acc.plus(&a.times(vj));
                    }
                }
                acc
            })
            .collect()
    }

    /// uᵀ M v.
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        dot(u, &self.mul_vec(v))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Row-reduced echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // largest magnitude pivot; exact domains only need nonzero
            let mut best = None;
            let mut best_mag = -1.0;
            for i in r..m.rows {
                if !m[(i, c)].negligible() {
                    let mag = m[(i, c)].magnitude();
                    if mag > best_mag {
                        best_mag = mag;
                        best = Some(i);
                    }
                }
            }
            let Some(p) = best else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip().expect("nonzero pivot");
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].times(&inv);
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        let v = m[(r, j)].times(&f);
                        m[(i, j)] = m[(i, j)].minus(&v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {x : M x = 0}.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (i, &p) in piv.iter().enumerate() {
                    v[p] = r[(i, f)].negate();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let aug = Self::from_fn(n, 2 * n, |i, j| if j < n { self[(i, j)].clone() } else if j - n == i { S::one() } else { S::zero() });
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn det(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = m.rows;
        let mut det = S::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].negligible()) else { return S::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = det.negate();
            }
            let piv = m[(c, c)].clone();
            det = det.times(&piv);
            let inv = piv.recip().expect("nonzero pivot");
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].times(&inv);
                for j in c..n {
                    let v = m[(c, j)].times(&f);
                    m[(i, j)] = m[(i, j)].minus(&v);
                }
            }
        }
        det
    }

    pub fn to_c64(&self) -> Mat<C64> {
        self.map(|x| x.to_c64())
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_c64())
    }
}

impl Mat<C64> {
    pub fn from_dmatrix(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in u.iter().zip(v) {
        if !a.is_zero() && !b.is_zero() {
            acc = acc.plus(&a.times(b));
        }
    }
    acc
}

pub fn vsub<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(a, b)| a.minus(b)).collect()
}

pub fn vadd<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(a, b)| a.plus(b)).collect()
}

pub fn vscale<S: Scalar>(u: &[S], c: &S) -> Vec<S> {
    u.iter().map(|a| a.times(c)).collect()
}

/// Inertia (n₊, n₋, n₀) of a symmetric rational matrix by symmetric elimination.
pub fn inertia_q(m: &Mat<crate::scalar::Q>) -> (usize, usize, usize) {
    use crate::scalar::Q;
    use num_traits::Signed;
    let n = m.rows;
    let mut a = m.clone();
    let (mut pos, mut neg, mut zer) = (0, 0, 0);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // diagonal pivot if available, else a 2x2 block made from an off-diagonal entry
        if let Some(&p) = active.iter().find(|&&i| !Scalar::is_zero(&a[(i, i)])) {
            let piv = a[(p, p)].clone();
            if piv.is_positive() {
                pos += 1
            } else {
                neg += 1
            }
            active.retain(|&i| i != p);
            for &i in &active {
                for &j in &active {
                    let v = &a[(i, p)] * &a[(p, j)] / &piv;
                    a[(i, j)] = &a[(i, j)] - v;
                }
            }
            continue;
        }
        let off = active.iter().flat_map(|&i| active.iter().map(move |&j| (i, j))).find(|&(i, j)| i != j && !Scalar::is_zero(&a[(i, j)]));
        match off {
            None => {
                zer += active.len();
                break;
            }
            Some((i, j)) => {
                // replace row/col i by i + j: diagonal becomes 2 a_ij
                for &k in &active {
                    let v: Q = a[(j, k)].clone();
                    a[(i, k)] = &a[(i, k)] + v;
                }
                for &k in &active {
                    let v: Q = a[(k, j)].clone();
                    a[(k, i)] = &a[(k, i)] + v;
                }
            }
        }
    }
    (pos, neg, zer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, Q};

    fn m(rows: &[&[i64]]) -> Mat<Q> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect())
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(3));
        assert_eq!(a.det(), qi(18));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspace_is_kernel() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(a.mul_vec(&v).iter().all(|x| Scalar::is_zero(x)));
        }
    }

    #[test]
    fn inertia_counts() {
        assert_eq!(inertia_q(&m(&[&[0, 1], &[1, 0]])), (1, 1, 0));
        assert_eq!(inertia_q(&m(&[&[1, 0, 0], &[0, -2, 0], &[0, 0, 0]])), (1, 1, 1));
        assert_eq!(inertia_q(&m(&[&[2, 1], &[1, 2]])), (2, 0, 0));
    }
}
