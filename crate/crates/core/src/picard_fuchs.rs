//! Picard–Fuchs operators at a MUM point, Frobenius bases, pairings and the mirror map.

use crate::linalg::Mat;
use crate::scalar::{qi, Scalar, C64, Q};
use crate::series::{LogSeries, SeriesError, TruncSeries};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfError {
    #[error("indicial polynomial at z=0 is not a multiple of sigma^4")]
    NotMum,
    #[error("leading coefficient p_4 vanishes at z=0")]
    LeadingVanishes,
    #[error("operator must have degree 4 in theta, got {0}")]
    WrongDegree(usize),
    #[error("order {got} too small, need at least {need}")]
    OrderTooSmall { got: usize, need: usize },
    #[error("no flat antisymmetric pairing to this truncation (operator not self-dual); nullity {0}")]
    NoPairing(usize),
    #[error("evaluation point |z|={0} outside the evaluation radius {1}")]
    OutsideRadius(f64, f64),
    #[error("series error: {0}")]
    Series(#[from] SeriesError),
}

/// L = Σ_k p_k(z) θ^k with rational polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PFOperator {
    /// `p[k][j]` is the coefficient of z^j in p_k.
    pub p: Vec<Vec<Q>>,
    pub mum_check: bool,
}

impl PFOperator {
    pub fn new(p: Vec<Vec<Q>>) -> Result<Self, PfError> {
        if p.len() != 5 {
            return Err(PfError::WrongDegree(p.len().saturating_sub(1)));
        }
        let op = PFOperator { p, mum_check: true };
        op.validate()?;
        Ok(op)
    }

    /// θ⁴ − 5z(5θ+1)(5θ+2)(5θ+3)(5θ+4).
    pub fn quintic() -> Self {
        let p = vec![
            vec![qi(0), qi(-120)],
            vec![qi(0), qi(-1250)],
            vec![qi(0), qi(-4375)],
            vec![qi(0), qi(-6250)],
            vec![qi(1), qi(-3125)],
        ];
        PFOperator { p, mum_check: true }
    }

    pub fn validate(&self) -> Result<(), PfError> {
        let c0 = |k: usize| self.p[k].first().cloned().unwrap_or_else(Q::zero);
        if Scalar::is_zero(&c0(4)) {
            return Err(PfError::LeadingVanishes);
        }
        if self.mum_check && (0..4).any(|k| !Scalar::is_zero(&c0(k))) {
            return Err(PfError::NotMum);
        }
        Ok(())
    }

    pub fn degree_z(&self) -> usize {
        self.p.iter().map(|c| c.len()).max().unwrap_or(1).saturating_sub(1)
    }

    /// P_j(σ) = Σ_k [z^j] p_k σ^k, as coefficient list in σ.
    fn pj(&self, j: usize) -> Vec<Q> {
        (0..5).map(|k| self.p[k].get(j).cloned().unwrap_or_else(Q::zero)).collect()
    }

    /// p_k as truncated series.
    pub fn p_series<S: Scalar>(&self, k: usize, order: usize) -> TruncSeries<S> {
        TruncSeries::new(self.p[k].iter().map(S::from_q).collect(), order)
    }

    /// L f for a log-series f.
    pub fn apply<S: Scalar>(&self, f: &LogSeries<S>) -> Result<LogSeries<S>, SeriesError> {
        let n = f.order();
        let mut acc = LogSeries::from_series(TruncSeries::zero(n));
        let mut th = f.clone();
        for k in 0..5 {
            let pk = LogSeries::from_series(self.p_series::<S>(k, n));
            acc = acc.add(&pk.mul(&th)?)?;
            th = th.theta();
        }
        Ok(acc)
    }

    /// Modulus of the nearest nonzero root of p_4, when p_4 is linear or constant.
    pub fn discriminant_radius(&self) -> Option<f64> {
        let c: Vec<f64> = self.p[4].iter().map(crate::scalar::q_to_f64).collect();
        let roots = poly_roots(&c);
        roots.into_iter().map(|r| r.norm()).filter(|r| *r > 0.0).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))))
    }
}

fn poly_roots(c: &[f64]) -> Vec<C64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return vec![];
    }
    // companion matrix eigenvalues
    let lead = c[d];
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().cloned().collect()
}

/// Truncated ε-series of length 4.
type Eps = [Q; 4];

fn eps_mul(a: &Eps, b: &Eps) -> Eps {
    let mut out: Eps = Default::default();
    for i in 0..4 {
        for j in 0..4 - i {
            out[i + j] = &out[i + j] + &a[i] * &b[j];
        }
    }
    out
}

fn eps_recip(a: &Eps) -> Eps {
    let inv0 = Scalar::recip(&a[0]).expect("invertible");
    let mut b: Eps = Default::default();
    b[0] = inv0.clone();
    for m in 1..4 {
        let mut acc = Q::zero();
        for k in 1..=m {
            acc = acc + &a[k] * &b[m - k];
        }
        b[m] = -(acc * &inv0);
    }
    b
}

/// P(m + ε) for a polynomial P in σ.
fn eps_eval(p: &[Q], m: i64) -> Eps {
    let mut out: Eps = Default::default();
    let base: Eps = [qi(m), Q::one(), Q::zero(), Q::zero()];
    let mut pw: Eps = [Q::one(), Q::zero(), Q::zero(), Q::zero()];
    for c in p {
        for i in 0..4 {
            out[i] = &out[i] + c * &pw[i];
        }
        pw = eps_mul(&pw, &base);
    }
    out
}

/// Frobenius solutions, pairing and optional integral frame.
#[derive(Clone, Debug)]
pub struct PeriodFrame {
    pub op: Option<PFOperator>,
    pub solutions: Vec<LogSeries<Q>>,
    pub pairing: Mat<Q>,
    pub basis_change: Option<Mat<Q>>,
    pub trunc_order: usize,
    float_solutions: Vec<LogSeries<C64>>,
}

impl PeriodFrame {
    pub fn from_parts(solutions: Vec<LogSeries<Q>>, pairing: Mat<Q>, basis_change: Option<Mat<Q>>) -> Self {
        let trunc_order = solutions.iter().map(|s| s.order()).min().unwrap_or(0);
        let float_solutions = solutions.iter().map(|s| s.map(|c| c.to_c64())).collect();
        PeriodFrame { op: None, solutions, pairing, basis_change, trunc_order, float_solutions }
    }

    pub fn float_solutions(&self) -> &[LogSeries<C64>] {
        &self.float_solutions
    }

    /// Q(u, v) = Σ_ab Σ_ab u_a v_b on log-series vectors.
    pub fn q_series(&self, u: &[LogSeries<Q>], v: &[LogSeries<Q>]) -> Result<LogSeries<Q>, SeriesError> {
        let n = self.trunc_order;
        let mut acc = LogSeries::from_series(TruncSeries::zero(n));
        for a in 0..4 {
            for b in 0..4 {
                let s = &self.pairing[(a, b)];
                if !Scalar::is_zero(s) {
                    acc = acc.add(&u[a].mul(&v[b])?.scale(s))?;
                }
            }
        }
        Ok(acc)
    }

    pub fn theta_vector(&self, k: usize) -> Vec<LogSeries<Q>> {
        self.solutions.iter().map(|s| s.theta_n(k)).collect()
    }
}

/// Four Frobenius solutions at the MUM point, exact through z^{order-1}.
pub fn frobenius_solutions(op: &PFOperator, order: usize) -> Result<Vec<LogSeries<Q>>, PfError> {
    op.validate()?;
    if order < 4 {
        return Err(PfError::OrderTooSmall { got: order, need: 4 });
    }
    let dz = op.degree_z();
    let pj: Vec<Vec<Q>> = (0..=dz).map(|j| op.pj(j)).collect();
    let mut c: Vec<Eps> = Vec::with_capacity(order);
    c.push([Q::one(), Q::zero(), Q::zero(), Q::zero()]);
    for m in 1..order {
        let mut rhs: Eps = Default::default();
        for j in 1..=dz.min(m) {
            let t = eps_mul(&c[m - j], &eps_eval(&pj[j], (m - j) as i64));
            for i in 0..4 {
                rhs[i] = &rhs[i] - &t[i];
            }
        }
        c.push(eps_mul(&rhs, &eps_recip(&eps_eval(&pj[0], m as i64))));
    }
    // ϖ_k = Σ_j (log z)^j / j! · Σ_m c_m^{(k-j)} z^m
    let mut sols = Vec::with_capacity(4);
    let fact = [1i64, 1, 2, 6];
    for k in 0..4 {
        let blocks = (0..=k)
            .map(|j| {
                let inv = Q::new(1.into(), fact[j].into());
                TruncSeries::new(c.iter().map(|cm| &cm[k - j] * &inv).collect(), order)
            })
            .collect();
        sols.push(LogSeries::new(blocks)?);
    }
    Ok(sols)
}

/// The flat antisymmetric pairing with Q(Π, θΠ) ≡ 0, scaled so that Σ_03 = 1.
pub fn pairing_from_wronskian(sols: &[LogSeries<Q>]) -> Result<Mat<Q>, PfError> {
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    let th: Vec<LogSeries<Q>> = sols.iter().map(|s| s.theta()).collect();
    // each unknown Σ_ab contributes ϖ_a θϖ_b − ϖ_b θϖ_a
    let mut cols: Vec<Vec<Q>> = Vec::new();
    for &(a, b) in &pairs {
        let w = sols[a].mul(&th[b])?.sub(&sols[b].mul(&th[a])?)?;
        let mut flat = Vec::new();
        for k in 0..=6 {
            flat.extend(w.block(k).coeffs().iter().cloned());
        }
        cols.push(flat);
    }
    let len = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    for c in cols.iter_mut() {
        c.resize(len, Q::zero());
    }
    let m = Mat::from_cols(&cols);
    let ns = m.nullspace();
    if ns.len() != 1 {
        return Err(PfError::NoPairing(ns.len()));
    }
    let v = &ns[0];
    let i03 = pairs.iter().position(|&p| p == (0, 3)).expect("pair present");
    let scale = Scalar::recip(&v[i03]).ok_or(PfError::NoPairing(0))?;
    let mut sigma = Mat::zeros(4, 4);
    for (idx, &(a, b)) in pairs.iter().enumerate() {
        let x = &v[idx] * &scale;
        sigma[(a, b)] = x.clone();
        sigma[(b, a)] = -x;
    }
    Ok(sigma)
}

pub fn frobenius_basis(op: &PFOperator, order: usize, basis_change: Option<Mat<Q>>) -> Result<PeriodFrame, PfError> {
    let sols = frobenius_solutions(op, order)?;
    let pairing = pairing_from_wronskian(&sols)?;
    let mut f = PeriodFrame::from_parts(sols, pairing, basis_change);
    f.op = Some(op.clone());
    Ok(f)
}

/// (q(z), z(q)) with q = z exp((ϖ_1 − ϖ_0 log z)/ϖ_0).
pub fn mirror_map(frame: &PeriodFrame) -> Result<(TruncSeries<Q>, TruncSeries<Q>), PfError> {
    let n = frame.trunc_order;
    if n < 2 {
        return Err(PfError::OrderTooSmall { got: n, need: 2 });
    }
    let w0 = frame.solutions[0].block(0);
    let f = frame.solutions[1].block(0).div(&w0)?;
    let qz = f.exp()?.shift(1);
    let zq = qz.reversion()?;
    Ok((qz, zq))
}

/// Numerical rank of d[Π] modulo Π at z0.
pub fn local_torelli_rank(frame: &PeriodFrame, z0: C64, r_eval: f64) -> Result<usize, PfError> {
    if z0.norm() > r_eval {
        return Err(PfError::OutsideRadius(z0.norm(), r_eval));
    }
    let lz = z0.ln();
    let fs = frame.float_solutions();
    let pi: Vec<C64> = fs.iter().map(|s| s.eval_c64(z0, lz)).collect();
    let dpi: Vec<C64> = fs.iter().map(|s| s.theta().eval_c64(z0, lz)).collect();
    Ok(rank_mod_line(&pi, &[dpi]))
}

/// Rank of the span of `ds` modulo the line through `p`.
pub fn rank_mod_line(p: &[C64], ds: &[Vec<C64>]) -> usize {
    let n = p.len();
    let pn: f64 = p.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if pn == 0.0 {
        return 0;
    }
    let u: Vec<C64> = p.iter().map(|x| x / pn).collect();
    let cols: Vec<Vec<C64>> = ds
        .iter()
        .map(|d| {
            let proj: C64 = u.iter().zip(d).map(|(a, b)| a.conj() * b).sum();
            d.iter().zip(&u).map(|(b, a)| b - proj * a).collect()
        })
        .collect();
    let scale = ds.iter().flat_map(|d| d.iter()).map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i] / scale);
    let sv = m.svd(false, false).singular_values;
    sv.iter().filter(|s| **s > 1e-10).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_fundamental_period() {
        let sols = frobenius_solutions(&PFOperator::quintic(), 6).unwrap();
        let w0 = sols[0].block(0);
        let expect = [1i64, 120, 113400, 168168000, 305540235000, 623360743125120];
        for (m, e) in expect.iter().enumerate() {
            assert_eq!(w0.coeff(m), qi(*e));
        }
        assert_eq!(sols[0].max_log_power(), 0);
    }

    #[test]
    fn log_structure() {
        let sols = frobenius_solutions(&PFOperator::quintic(), 8).unwrap();
        let w0 = sols[0].block(0);
        let fact = [1i64, 1, 2, 6];
        for k in 0..4 {
            assert_eq!(sols[k].max_log_power(), k);
            assert_eq!(sols[k].block(k), w0.scale(&Q::new(1.into(), fact[k].into())));
            for j in 0..k {
                assert!(Scalar::is_zero(&sols[k].block(j).coeff(0)));
            }
        }
    }

    #[test]
    fn residual_vanishes() {
        let op = PFOperator::quintic();
        for s in frobenius_solutions(&op, 10).unwrap() {
            assert!(op.apply(&s).unwrap().is_zero());
        }
    }

    #[test]
    fn quintic_pairing() {
        let f = frobenius_basis(&PFOperator::quintic(), 10, None).unwrap();
        let expect = Mat::from_rows(vec![
            vec![qi(0), qi(0), qi(0), qi(1)],
            vec![qi(0), qi(0), qi(-1), qi(0)],
            vec![qi(0), qi(1), qi(0), qi(0)],
            vec![qi(-1), qi(0), qi(0), qi(0)],
        ]);
        assert_eq!(f.pairing, expect);
        let pi = f.solutions.clone();
        assert!(f.q_series(&pi, &f.theta_vector(1)).unwrap().is_zero());
        assert!(f.q_series(&pi, &f.theta_vector(2)).unwrap().is_zero());
        assert!(!f.q_series(&f.theta_vector(1), &f.theta_vector(2)).unwrap().is_zero());
    }

    #[test]
    fn not_mum_rejected() {
        let mut op = PFOperator::quintic();
        op.p[2][0] = qi(1);
        assert_eq!(frobenius_solutions(&op, 5).unwrap_err(), PfError::NotMum);
        let mut op = PFOperator::quintic();
        op.p[4][0] = qi(0);
        assert_eq!(frobenius_solutions(&op, 5).unwrap_err(), PfError::LeadingVanishes);
    }

    #[test]
    fn trivial_operator_mirror_map() {
        // L = θ⁴: ϖ_1 = log z exactly
        let op = PFOperator::new(vec![vec![qi(0)], vec![qi(0)], vec![qi(0)], vec![qi(0)], vec![qi(1)]]).unwrap();
        let f = frobenius_basis(&op, 6, None).unwrap();
        let (qz, zq) = mirror_map(&f).unwrap();
        assert_eq!(qz, TruncSeries::var(6));
        assert_eq!(zq, TruncSeries::var(6));
    }

    #[test]
    fn quintic_mirror_map_leading() {
        let f = frobenius_basis(&PFOperator::quintic(), 6, None).unwrap();
        let (qz, zq) = mirror_map(&f).unwrap();
        assert_eq!(qz.coeff(1), qi(1));
        assert_eq!(qz.coeff(2), qi(770));
        assert_eq!(zq.coeff(1), qi(1));
        assert_eq!(zq.coeff(2), qi(-770));
        assert_eq!(qz.compose(&zq).unwrap(), TruncSeries::var(6));
    }

    #[test]
    fn torelli_quintic_and_degenerate() {
        let f = frobenius_basis(&PFOperator::quintic(), 20, None).unwrap();
        assert_eq!(local_torelli_rank(&f, C64::new(1e-4, 0.0), 1.6e-4).unwrap(), 1);
        let w0 = f.solutions[0].clone();
        let deg = PeriodFrame::from_parts(vec![w0.clone(), w0.scale(&qi(2)), w0.scale(&qi(3)), w0], f.pairing.clone(), None);
        assert_eq!(local_torelli_rank(&deg, C64::new(1e-4, 0.0), 1.6e-4).unwrap(), 0);
        assert!(local_torelli_rank(&f, C64::new(1e-3, 0.0), 1.6e-4).is_err());
    }

    #[test]
    fn discriminant() {
        let r = PFOperator::quintic().discriminant_radius().unwrap();
        assert!((r - 1.0 / 3125.0).abs() < 1e-15);
    }
}
