//! Formal deformations on finite-dimensional DGLA models.
//!
//! A model is a graded space L⁰ → L¹ → L² → L³ with differential ∂̄, a symmetric
//! bracket L¹ × L¹ → L² and Hodge data for the standard inner product. Brackets
//! involving other degrees are zero.

use crate::exterior::{d_dz, dz, dzbar, wedge_all, Form};
use crate::linalg::{vadd, vscale, Mat};
use crate::scalar::{q, qi, Gq, Scalar, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum KuranishiError {
    #[error("direction {0} is not harmonic")]
    NonHarmonic(usize),
    #[error("inconsistent Hodge data: {0}")]
    HodgeInconsistent(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("obstructed at {0}: bracket source has a harmonic part")]
    Obstructed(String),
    #[error("model has no contraction data")]
    MissingContraction,
    #[error("order must be at least 1")]
    BadOrder,
}

/// Exponent vector, ordered by total degree and then lexicographically with
/// larger leading exponents first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    /// All indices of `n` variables with total degree `d`, in ascending order.
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == n - 1 {
                prefix.push(d);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=d).rev() {
                prefix.push(e);
                rec(n, d - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(MultiIndex(vec![]));
            }
            return out;
        }
        rec(n, d, &mut Vec::new(), &mut out);
        out
    }

    /// Ordered splittings I = J + K with J, K nonzero.
    pub fn splittings(&self) -> Vec<(MultiIndex, MultiIndex)> {
        let mut out = Vec::new();
        let mut j = vec![0u32; self.0.len()];
        loop {
            let dj: u32 = j.iter().sum();
            if dj > 0 && dj < self.degree() {
                let k: Vec<u32> = self.0.iter().zip(&j).map(|(a, b)| a - b).collect();
                out.push((MultiIndex(j.clone()), MultiIndex(k)));
            }
            let mut p = 0;
            loop {
                if p == j.len() {
                    return out;
                }
                if j[p] < self.0[p] {
                    j[p] += 1;
                    break;
                }
                j[p] = 0;
                p += 1;
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| o.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Reference holomorphic form and the contraction φ⌟ for each basis element of L¹.
#[derive(Clone, Debug, PartialEq)]
pub struct FormData {
    pub omega0: Vec<Gq>,
    pub contraction: Vec<Mat<Gq>>,
    /// Harmonic projector on the form space; identity when absent.
    pub harmonic: Option<Mat<Gq>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HodgeData {
    pub harmonic: Vec<Mat<Q>>,
    pub green: Vec<Mat<Q>>,
    /// codiff[q]: L^q → L^{q-1}; codiff[0] is 0 × dims[0].
    pub codiff: Vec<Mat<Q>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DGLAModel {
    pub dims: Vec<usize>,
    /// dbar[q]: L^q → L^{q+1}.
    pub dbar: Vec<Mat<Q>>,
    /// bracket[k] is the matrix of the k-th L² component of [e_i, e_j].
    pub bracket: Vec<Mat<Q>>,
    pub hodge: HodgeData,
    pub form: Option<FormData>,
}

fn hodge_for(dims: &[usize], dbar: &[Mat<Q>]) -> HodgeData {
    let top = dims.len();
    let mut harmonic = Vec::new();
    let mut green = Vec::new();
    let mut codiff = Vec::new();
    for k in 0..top {
        let n = dims[k];
        let mut lap = Mat::<Q>::zeros(n, n);
        if k > 0 {
            let d = &dbar[k - 1];
            lap = lap.add(&d.mul(&d.transpose()));
            codiff.push(d.transpose());
        } else {
            codiff.push(Mat::zeros(0, n));
        }
        if k + 1 < top {
            let d = &dbar[k];
            lap = lap.add(&d.transpose().mul(d));
        }
        let ker = lap.nullspace();
        let p = if ker.is_empty() {
            Mat::zeros(n, n)
        } else {
            let nb = Mat::from_cols(&ker);
            let gram = nb.transpose().mul(&nb).inverse().expect("Gram of a basis is invertible");
            nb.mul(&gram).mul(&nb.transpose())
        };
        let g = lap.add(&p).inverse().expect("Laplacian plus harmonic projector is invertible").sub(&p);
        harmonic.push(p);
        green.push(g);
    }
    HodgeData { harmonic, green, codiff }
}

impl DGLAModel {
    /// Builds a model with Hodge data for the standard inner product. `bracket` holds
    /// sparse triples (i, j, k, c) meaning [e_i, e_j] has coefficient c on f_k; the
    /// symmetric entry is filled in.
    pub fn new(
        dims: Vec<usize>,
        dbar: Vec<Mat<Q>>,
        triples: &[(usize, usize, usize, Q)],
        form: Option<FormData>,
    ) -> Result<Self, KuranishiError> {
        if dims.len() != 4 {
            return Err(KuranishiError::InvalidModel(format!("expected 4 graded dimensions, got {}", dims.len())));
        }
        if dbar.len() != 3 {
            return Err(KuranishiError::InvalidModel("expected 3 differentials".into()));
        }
        for (k, d) in dbar.iter().enumerate() {
            if d.rows != dims[k + 1] || d.cols != dims[k] {
                return Err(KuranishiError::InvalidModel(format!(
                    "dbar[{k}] is {}x{}, expected {}x{}",
                    d.rows, d.cols, dims[k + 1], dims[k]
                )));
            }
        }
        let (n1, n2) = (dims[1], dims[2]);
        let mut bracket = vec![Mat::<Q>::zeros(n1, n1); n2];
        for (i, j, k, c) in triples {
            if *i >= n1 || *j >= n1 || *k >= n2 {
                return Err(KuranishiError::InvalidModel(format!("bracket triple ({i},{j},{k}) out of range")));
            }
            bracket[*k][(*i, *j)] = c.clone();
            bracket[*k][(*j, *i)] = c.clone();
        }
        if let Some(f) = &form {
            if f.contraction.len() != n1 {
                return Err(KuranishiError::InvalidModel("one contraction matrix per L1 basis element".into()));
            }
            let m = f.omega0.len();
            if f.contraction.iter().any(|c| c.rows != m || c.cols != m) {
                return Err(KuranishiError::InvalidModel("contraction matrices must be square on the form space".into()));
            }
        }
        let hodge = hodge_for(&dims, &dbar);
        Ok(DGLAModel { dims, dbar, bracket, hodge, form })
    }

    pub fn bracket_of(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        self.bracket.iter().map(|m| m.bilinear(a, b)).collect()
    }

    /// Checks ∂̄² = 0, adjointness, the Hodge decomposition and graded Leibniz.
    pub fn validate(&self) -> Result<(), KuranishiError> {
        let bad = |s: String| Err(KuranishiError::HodgeInconsistent(s));
        for k in 0..2 {
            if !self.dbar[k + 1].mul(&self.dbar[k]).is_zero() {
                return Err(KuranishiError::InvalidModel(format!("dbar[{}] dbar[{}] != 0", k + 1, k)));
            }
        }
        for k in 1..4 {
            if self.hodge.codiff[k] != self.dbar[k - 1].transpose() {
                return bad(format!("codifferential on L{k} is not the adjoint"));
            }
        }
        for k in 0..4 {
            let n = self.dims[k];
            let p = &self.hodge.harmonic[k];
            let g = &self.hodge.green[k];
            if p.mul(p) != *p {
                return bad(format!("harmonic projector on L{k} is not idempotent"));
            }
            let mut sum = p.clone();
            if k > 0 {
                sum = sum.add(&self.dbar[k - 1].mul(&self.hodge.codiff[k]).mul(g));
            }
            if k < 3 {
                sum = sum.add(&self.hodge.codiff[k + 1].mul(&self.hodge.green[k + 1]).mul(&self.dbar[k]));
            }
            if sum != Mat::identity(n) {
                return bad(format!("Hodge decomposition fails on L{k}"));
            }
        }
        let n1 = self.dims[1];
        for k in 0..self.dims[2] {
            if self.bracket[k] != self.bracket[k].transpose() {
                return Err(KuranishiError::InvalidModel("bracket on L1 must be symmetric".into()));
            }
        }
        let unit = |n: usize, i: usize| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect::<Vec<Q>>();
        for i in 0..n1 {
            for j in i..n1 {
                let b = self.bracket_of(&unit(n1, i), &unit(n1, j));
                if self.dbar[2].mul_vec(&b).iter().any(|x| !x.is_zero()) {
                    return Err(KuranishiError::InvalidModel(format!("Leibniz rule fails on ({i},{j})")));
                }
            }
        }
        for a in 0..self.dims[0] {
            let da = self.dbar[0].col(a);
            for j in 0..n1 {
                if self.bracket_of(&da, &unit(n1, j)).iter().any(|x| !x.is_zero()) {
                    return Err(KuranishiError::InvalidModel(format!("Leibniz rule fails on L0 element {a}")));
                }
            }
        }
        Ok(())
    }

    /// Basis of harmonic elements of L¹.
    pub fn harmonic_basis(&self) -> Vec<Vec<Q>> {
        let p = &self.hodge.harmonic[1];
        let (_, piv) = p.rref();
        piv.iter().map(|&c| p.col(c)).collect()
    }

    pub fn is_harmonic(&self, v: &[Q]) -> bool {
        self.hodge.harmonic[1].mul_vec(v) == v
    }
}

/// Formal solution φ(τ) = Σ_I φ_I τ^I.
#[derive(Clone, Debug, PartialEq)]
pub struct BeltramiSeries {
    pub n_vars: usize,
    pub order: u32,
    pub terms: BTreeMap<MultiIndex, Vec<Q>>,
}

impl BeltramiSeries {
    pub fn zero(n_vars: usize, dim: usize, order: u32) -> Self {
        let mut terms = BTreeMap::new();
        for d in 1..=order {
            for i in MultiIndex::of_degree(n_vars, d) {
                terms.insert(i, vec![Q::zero(); dim]);
            }
        }
        BeltramiSeries { n_vars, order, terms }
    }

    pub fn linear(directions: &[Vec<Q>], order: u32) -> Self {
        let dim = directions.first().map_or(0, |d| d.len());
        let mut s = Self::zero(directions.len(), dim, order);
        for (i, d) in directions.iter().enumerate() {
            s.terms.insert(MultiIndex::unit(directions.len(), i), d.clone());
        }
        s
    }

    pub fn term(&self, i: &MultiIndex) -> Option<&Vec<Q>> {
        self.terms.get(i)
    }
}

fn bracket_source(model: &DGLAModel, terms: &BTreeMap<MultiIndex, Vec<Q>>, i: &MultiIndex) -> Vec<Q> {
    let mut s = vec![Q::zero(); model.dims[2]];
    for (j, k) in i.splittings() {
        if let (Some(a), Some(b)) = (terms.get(&j), terms.get(&k)) {
            s = vadd(&s, &model.bracket_of(a, b));
        }
    }
    s
}

/// Order-by-order solution with φ_I = −½ ∂̄*G Σ_{J+K=I} [φ_J, φ_K].
pub fn solve_maurer_cartan(model: &DGLAModel, directions: &[Vec<Q>], order: u32) -> Result<BeltramiSeries, KuranishiError> {
    if order < 1 {
        return Err(KuranishiError::BadOrder);
    }
    for (i, d) in directions.iter().enumerate() {
        if d.len() != model.dims[1] || !model.is_harmonic(d) {
            return Err(KuranishiError::NonHarmonic(i));
        }
    }
    let n = directions.len();
    let mut phi = BeltramiSeries::linear(directions, order);
    if n == 0 {
        return Ok(phi);
    }
    let half = q(-1, 2);
    let step = model.hodge.codiff[2].mul(&model.hodge.green[2]).scale(&half);
    for d in 2..=order {
        let idx = MultiIndex::of_degree(n, d);
        let terms = &phi.terms;
        let solved: Vec<Result<(MultiIndex, Vec<Q>), KuranishiError>> = idx
            .par_iter()
            .map(|i| {
                let s = bracket_source(model, terms, i);
                if model.hodge.harmonic[2].mul_vec(&s).iter().any(|x| !x.is_zero()) {
                    return Err(KuranishiError::Obstructed(i.to_string()));
                }
                Ok((i.clone(), step.mul_vec(&s)))
            })
            .collect();
        for r in solved {
            let (i, v) = r?;
            phi.terms.insert(i, v);
        }
    }
    Ok(phi)
}

/// ∂̄φ + ½[φ, φ] through the order of φ.
pub fn mc_residual(model: &DGLAModel, phi: &BeltramiSeries) -> BTreeMap<MultiIndex, Vec<Q>> {
    let half = q(1, 2);
    let mut out = BTreeMap::new();
    for d in 1..=phi.order {
        for i in MultiIndex::of_degree(phi.n_vars, d) {
            let lin = match phi.terms.get(&i) {
                Some(v) => model.dbar[1].mul_vec(v),
                None => vec![Q::zero(); model.dims[2]],
            };
            let quad = vscale(&bracket_source(model, &phi.terms, &i), &half);
            out.insert(i, vadd(&lin, &quad));
        }
    }
    out
}

pub fn residual_is_zero(res: &BTreeMap<MultiIndex, Vec<Q>>) -> bool {
    res.values().all(|v| v.iter().all(|x| x.is_zero()))
}

/// Form-valued polynomial in τ.
pub type FormSeries = BTreeMap<MultiIndex, Vec<Gq>>;

fn apply_phi(form: &FormData, phi_i: &[Q], w: &[Gq]) -> Vec<Gq> {
    let mut out = vec![Gq::zero(); w.len()];
    for (a, c) in phi_i.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let v = form.contraction[a].mul_vec(w);
        let c = Gq::real(c.clone());
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.plus(&x.times(&c));
        }
    }
    out
}

/// Ω_τ = Σ_k (−1)^k/k! (φ⌟)^k Ω₀, truncated at the order of φ.
pub fn holomorphic_form_expansion(model: &DGLAModel, phi: &BeltramiSeries) -> Result<FormSeries, KuranishiError> {
    let form = model.form.as_ref().ok_or(KuranishiError::MissingContraction)?;
    let zero_idx = MultiIndex(vec![0; phi.n_vars]);
    let mut total: FormSeries = BTreeMap::new();
    total.insert(zero_idx.clone(), form.omega0.clone());
    let mut power: FormSeries = total.clone();
    let dim = form.omega0.len();
    for k in 1..=3i64 {
        let mut next: FormSeries = BTreeMap::new();
        for (ip, w) in &power {
            for (iq, v) in &phi.terms {
                let idx = ip.add(iq);
                if idx.degree() > phi.order || v.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let c = apply_phi(form, v, w);
                let e = next.entry(idx).or_insert_with(|| vec![Gq::zero(); dim]);
                *e = vadd(e, &c);
            }
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let fact: i64 = (1..=k).product();
        let c = Gq::real(q(sign, fact));
        for (i, v) in &next {
            let e = total.entry(i.clone()).or_insert_with(|| vec![Gq::zero(); dim]);
            *e = vadd(e, &vscale(v, &c));
        }
        power = next;
    }
    for d in 0..=phi.order {
        for i in MultiIndex::of_degree(phi.n_vars, d) {
            total.entry(i).or_insert_with(|| vec![Gq::zero(); dim]);
        }
    }
    Ok(total)
}

/// Harmonic projection of the holomorphic-form expansion through degree 2.
pub fn cohomology_expansion(model: &DGLAModel, phi: &BeltramiSeries) -> Result<FormSeries, KuranishiError> {
    let form = model.form.as_ref().ok_or(KuranishiError::MissingContraction)?;
    let mut cut = phi.clone();
    cut.order = phi.order.min(2);
    cut.terms.retain(|i, _| i.degree() <= 2);
    let full = holomorphic_form_expansion(model, &cut)?;
    Ok(full
        .into_iter()
        .map(|(i, v)| {
            let p = match &form.harmonic {
                Some(h) => h.mul_vec(&v),
                None => v,
            };
            (i, p)
        })
        .collect())
}

/// Index of the Beltrami basis element dz̄^b ⊗ ∂_a.
pub fn torus_index(a: usize, b: usize) -> usize {
    3 * a + b
}

/// Reference form dz¹∧dz²∧dz³ on the torus.
pub fn torus_omega0() -> Form {
    wedge_all(&[dz(0), dz(1), dz(2)])
}

/// Contraction (dz̄^b ⊗ ∂_a)⌟ω = dz̄^b ∧ ι_{∂_a} ω.
pub fn torus_contract(a: usize, b: usize, w: &Form) -> Form {
    dzbar(b).wedge(&w.interior(&d_dz(a)))
}

/// Constant-form model of ℂ³/(ℤ³ + iℤ³).
pub fn torus_model() -> DGLAModel {
    let dims = vec![3, 9, 9, 3];
    let dbar = vec![Mat::zeros(9, 3), Mat::zeros(9, 9), Mat::zeros(3, 9)];
    let basis: Vec<Form> = (0..20)
        .map(|k| {
            let mut v = vec![Gq::zero(); 20];
            v[k] = Gq::one();
            Form::from_h3(&v)
        })
        .collect();
    let mut contraction = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let cols: Vec<Vec<Gq>> = basis.iter().map(|f| torus_contract(a, b, f).to_h3()).collect();
            contraction.push(Mat::from_cols(&cols));
        }
    }
    let form = FormData { omega0: torus_omega0().to_h3(), contraction, harmonic: None };
    DGLAModel::new(dims, dbar, &[], Some(form)).expect("torus model is well formed")
}

fn small_int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    qi(rng.gen_range(lo..=hi))
}

/// Random unit lower times unit upper triangular integer matrix.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Mat<Q> {
    let mut l = Mat::<Q>::identity(n);
    let mut u = Mat::<Q>::identity(n);
    for i in 0..n {
        for j in 0..i {
            l[(i, j)] = small_int(rng, -2, 2);
            u[(j, i)] = small_int(rng, -2, 2);
        }
    }
    l.mul(&u)
}

/// Seeded model with L⁰ of dimension p, L¹ = H ⊕ U ⊕ ∂̄L⁰ (h + u + p) and L² = ∂̄U (u),
/// written in a skewed basis so the harmonic projector is not diagonal.
pub fn random_model_with(seed: u64, p: usize, h: usize, u: usize) -> DGLAModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = h + u + p;
    let t = random_unimodular(&mut rng, n1);
    let tinv = t.inverse().expect("unimodular");
    let mut a = Mat::<Q>::zeros(u, u);
    while a.det().is_zero() {
        a = Mat::from_fn(u, u, |_, _| Q::zero());
        for i in 0..u {
            for j in 0..u {
                a[(i, j)] = small_int(&mut rng, -3, 3);
            }
        }
    }
    let select_u = Mat::from_fn(u, n1, |i, j| if j == h + i { Q::one() } else { Q::zero() });
    let d1 = a.mul(&select_u).mul(&tinv);
    let embed_v = Mat::from_fn(n1, p, |i, j| if i == h + u + j { Q::one() } else { Q::zero() });
    let d0 = t.mul(&embed_v);
    let d2 = Mat::zeros(0, u);
    // bracket defined on the H ⊕ U coordinates so that ∂̄L⁰ is central
    let m = h + u;
    let mut local = vec![Mat::<Q>::zeros(n1, n1); u];
    for (k, lk) in local.iter_mut().enumerate() {
        for i in 0..m {
            for j in i..m {
                if rng.gen_bool(0.5) {
                    let c = small_int(&mut rng, -3, 3);
                    lk[(i, j)] = c.clone();
                    lk[(j, i)] = c;
                }
            }
        }
        let _ = k;
    }
    let mut triples = Vec::new();
    for (k, lk) in local.iter().enumerate() {
        let g = tinv.transpose().mul(lk).mul(&tinv);
        for i in 0..n1 {
            for j in i..n1 {
                if !g[(i, j)].is_zero() {
                    triples.push((i, j, k, g[(i, j)].clone()));
                }
            }
        }
    }
    DGLAModel::new(vec![p, n1, u, 0], vec![d0, d1, d2], &triples, None).expect("random model is well formed")
}

/// Seeded model with total dimension at most 12.
pub fn random_model(seed: u64) -> DGLAModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let p = rng.gen_range(0..=1);
    let h = rng.gen_range(1..=3);
    let u = rng.gen_range(1..=4).min((12 - 2 * p - h) / 2);
    random_model_with(seed, p, h, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Form;

    /// Restricts φ to the line τ = t·v and checks ∂̄φ + ½[φ,φ] as a polynomial in t.
    fn line_residual(model: &DGLAModel, phi: &BeltramiSeries, v: &[Q]) -> Vec<Vec<Q>> {
        let ord = phi.order as usize;
        let mut coeff = vec![vec![Q::zero(); model.dims[1]]; ord + 1];
        for (i, x) in &phi.terms {
            let mut w = Q::one();
            for (e, vi) in i.0.iter().zip(v) {
                for _ in 0..*e {
                    w *= vi;
                }
            }
            coeff[i.degree() as usize] = vadd(&coeff[i.degree() as usize], &vscale(x, &w));
        }
        (0..=ord)
            .map(|d| {
                let mut r = model.dbar[1].mul_vec(&coeff[d]);
                for a in 0..=d {
                    let b = model.bracket_of(&coeff[a], &coeff[d - a]);
                    r = vadd(&r, &vscale(&b, &q(1, 2)));
                }
                r
            })
            .collect()
    }

    #[test]
    fn multi_index_order() {
        let i = MultiIndex::of_degree(2, 2);
        assert_eq!(i, vec![MultiIndex(vec![2, 0]), MultiIndex(vec![1, 1]), MultiIndex(vec![0, 2])]);
        assert!(MultiIndex(vec![0, 1]) > MultiIndex(vec![1, 0]));
        assert!(MultiIndex(vec![2, 0]) > MultiIndex(vec![0, 1]));
        assert_eq!(MultiIndex(vec![1, 1]).splittings().len(), 2);
        assert_eq!(MultiIndex(vec![2, 1]).splittings().len(), 4);
    }

    #[test]
    fn abelian_model_is_linear() {
        let m = torus_model();
        m.validate().unwrap();
        let dirs: Vec<Vec<Q>> = m.harmonic_basis();
        assert_eq!(dirs.len(), 9);
        let phi = solve_maurer_cartan(&m, &dirs[..3], 4).unwrap();
        for (i, v) in &phi.terms {
            if i.degree() > 1 {
                assert!(v.iter().all(|x| x.is_zero()));
            }
        }
        assert!(residual_is_zero(&mc_residual(&m, &phi)));
    }

    #[test]
    fn random_models_validate_and_solve() {
        for seed in 0..20 {
            let m = random_model(seed);
            let total: usize = m.dims.iter().sum();
            assert!(total <= 12);
            m.validate().unwrap();
            let dirs = m.harmonic_basis();
            let phi = solve_maurer_cartan(&m, &dirs, 4).unwrap();
            assert!(residual_is_zero(&mc_residual(&m, &phi)), "seed {seed}");
            for (i, v) in &phi.terms {
                if i.degree() >= 2 {
                    assert!(m.hodge.harmonic[1].mul_vec(v).iter().all(|x| x.is_zero()));
                }
            }
            let v: Vec<Q> = (0..dirs.len()).map(|k| q(k as i64 + 2, 3)).collect();
            for r in line_residual(&m, &phi, &v) {
                assert!(r.iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn six_dimensional_model_has_nontrivial_bracket() {
        let m = random_model_with(7, 0, 2, 2);
        assert_eq!(m.dims.iter().sum::<usize>(), 6);
        m.validate().unwrap();
        let dirs = m.harmonic_basis();
        let phi = solve_maurer_cartan(&m, &dirs, 4).unwrap();
        assert!(phi.terms.iter().any(|(i, v)| i.degree() == 2 && v.iter().any(|x| !x.is_zero())));
        assert!(residual_is_zero(&mc_residual(&m, &phi)));
    }

    #[test]
    fn residual_of_linear_term() {
        let m = random_model_with(3, 0, 2, 2);
        let d = m.harmonic_basis();
        let phi = BeltramiSeries::linear(&d[..1], 2);
        let res = mc_residual(&m, &phi);
        let expect = vscale(&m.bracket_of(&d[0], &d[0]), &q(1, 2));
        assert_eq!(res[&MultiIndex(vec![2])], expect);
        assert!(res[&MultiIndex(vec![1])].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn non_harmonic_direction_rejected() {
        let m = random_model_with(3, 0, 2, 2);
        let mut v = vec![Q::zero(); m.dims[1]];
        v[0] = Q::one();
        v[1] = Q::one();
        if !m.is_harmonic(&v) {
            assert_eq!(solve_maurer_cartan(&m, &[v], 2), Err(KuranishiError::NonHarmonic(0)));
        }
    }

    fn unit9(i: usize) -> Vec<Q> {
        (0..9).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
    }

    #[test]
    fn torus_single_direction() {
        let m = torus_model();
        let phi = solve_maurer_cartan(&m, &[unit9(torus_index(0, 0))], 3).unwrap();
        let om = holomorphic_form_expansion(&m, &phi).unwrap();
        let c1 = Form::from_h3(&om[&MultiIndex(vec![1])]);
        let expect = wedge_all(&[dzbar(0), dz(1), dz(2)]).scale(&Gq::int(-1, 0));
        assert_eq!(c1, expect);
        assert!(om[&MultiIndex(vec![2])].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn torus_diagonal_direction() {
        let m = torus_model();
        let mut d = vec![Q::zero(); 9];
        for a in 0..3 {
            d[torus_index(a, a)] = Q::one();
        }
        let phi = solve_maurer_cartan(&m, &[d], 3).unwrap();
        let om = holomorphic_form_expansion(&m, &phi).unwrap();
        let c3 = Form::from_h3(&om[&MultiIndex(vec![3])]);
        assert_eq!(c3, wedge_all(&[dzbar(0), dzbar(1), dzbar(2)]).scale(&Gq::int(-1, 0)));
    }

    /// Closed form Ω = ∧_a (dz^a − Σ_b φ^a_b dz̄^b) evaluated at rational τ.
    #[test]
    fn torus_expansion_matches_wedge_oracle() {
        let m = torus_model();
        let dirs: Vec<Vec<Q>> = (0..9).map(unit9).collect();
        let phi = solve_maurer_cartan(&m, &dirs, 3).unwrap();
        let om = holomorphic_form_expansion(&m, &phi).unwrap();
        let tau: Vec<Q> = (0..9).map(|k| q(k as i64 - 4, k as i64 + 2)).collect();
        let mut total = vec![Gq::zero(); 20];
        for (i, v) in &om {
            let mut w = Q::one();
            for (e, t) in i.0.iter().zip(&tau) {
                for _ in 0..*e {
                    w *= t;
                }
            }
            total = vadd(&total, &vscale(v, &Gq::real(w)));
        }
        let factors: Vec<Form> = (0..3)
            .map(|a| {
                let mut f = dz(a);
                for b in 0..3 {
                    f = f.sub(&dzbar(b).scale(&Gq::real(tau[torus_index(a, b)].clone())));
                }
                f
            })
            .collect();
        assert_eq!(Form::from_h3(&total), wedge_all(&factors));
    }

    #[test]
    fn torus_cohomology_and_torelli() {
        let m = torus_model();
        let dirs: Vec<Vec<Q>> = (0..9).map(unit9).collect();
        let phi = solve_maurer_cartan(&m, &dirs, 2).unwrap();
        let cls = cohomology_expansion(&m, &phi).unwrap();
        let deg1: Vec<Vec<Gq>> = (0..9).map(|i| cls[&MultiIndex::unit(9, i)].clone()).collect();
        for (i, v) in deg1.iter().enumerate() {
            let w = Form::from_h3(&m.form.as_ref().unwrap().contraction[i].mul_vec(&torus_omega0().to_h3()));
            assert_eq!(Form::from_h3(v), w.scale(&Gq::int(-1, 0)));
        }
        assert_eq!(Mat::from_cols(&deg1).rank(), 9);
    }

    #[test]
    fn torus_normalization() {
        let om = torus_omega0();
        let v = om.wedge(&om.conj()).integrate();
        // (−1)^{n(n−1)/2} i^n ∫Ω∧Ω̄ with n = 3 equals i∫Ω∧Ω̄
        let norm = Gq::i().times(&v);
        assert_eq!(norm, Gq::int(8, 0));
    }
}
