//! The master equation on the moduli side: the second-order operator built from
//! C̄, G and e^{2K}, parallel Gaussian states along paths in τ, and the λ-expansion
//! of Z = exp(c·Σ λ^{2g−2} F_g) compared order by order with the genus recursion.

use crate::linalg::Mat;
use crate::poly::Poly;
use crate::quantization::{CMat, GaussianState, Polarization, QuantError};
use crate::scalar::{q, ComplexScalar, Gq, Scalar, C64};
use crate::special_geometry::{GeometryError, SpecialChart, SpecialGeometrySample};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnomalyError {
    #[error("metric G is singular")]
    SingularMetric,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error("λ-order {requested} needs F_g beyond the supplied genus {available}")]
    InsufficientTruncation { requested: usize, available: usize },
    #[error("polynomial degree {0} exceeds the working cap {1}")]
    DegreeCap(u32, u32),
    #[error("toy data must be polynomials in (τ, τ̄): got {0} variables")]
    NotOneModulus(usize),
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("path needs at least two points")]
    ShortPath,
    #[error("state has dimension {0}, the chart has {1} moduli")]
    Dimension(usize, usize),
    #[error("closed-form transport is singular: det(1 − 2∫M·Q) = 0")]
    SingularKernel,
}

/// ∂_a + λ²·coeff[a]^{ij} D_i D_j at a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct MasterOperator<S> {
    pub tau: Vec<C64>,
    pub lambda_power: u32,
    pub e2k: S,
    /// coeff[a][(i, j)] = (√−1/4) e^{2K} Σ_{b,c} C̄_abc G^{b̄i} G^{c̄j}.
    pub coeff: Vec<Mat<S>>,
    /// The middle-bundle form (√−1/4) Σ C̄_abc g^{b̄i} g^{c̄j} with g = e^{−K}G.
    pub middle: Vec<Mat<S>>,
    pub asymmetry: f64,
    pub weight_residual: f64,
}

impl<S: ComplexScalar> MasterOperator<S> {
    pub fn dim(&self) -> usize {
        self.coeff.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.coeff.iter().all(|m| m.is_zero())
    }

    /// The coefficient tensor with λ² multiplied in.
    pub fn at_lambda(&self, lambda: &S) -> Vec<Mat<S>> {
        let l2 = lambda.times(lambda);
        self.coeff.iter().map(|m| m.scale(&l2)).collect()
    }
}

fn contract<S: ComplexScalar>(c: &crate::special_geometry::Tensor3<S>, inv: &Mat<S>, pref: &S) -> Vec<Mat<S>> {
    let n = c.n;
    (0..n)
        .map(|a| {
            Mat::from_fn(n, n, |i, j| {
                let mut acc = S::zero();
                for b in 0..n {
                    for cc in 0..n {
                        let x = c.get(a, b, cc).conjugate().times(&inv[(b, i)]).times(&inv[(cc, j)]);
                        acc = acc.plus(&x);
                    }
                }
                acc.times(pref)
            })
        })
        .collect()
}

fn mag<S: Scalar>(m: &Mat<S>) -> f64 {
    (0..m.rows).flat_map(|i| (0..m.cols).map(move |j| (i, j))).fold(0.0f64, |a, ij| a.max(m[ij].magnitude()))
}

pub fn master_operator<S: ComplexScalar>(sample: &SpecialGeometrySample<S>) -> Result<MasterOperator<S>, AnomalyError> {
    let ginv = sample.g.inverse().ok_or(AnomalyError::SingularMetric)?;
    let minv = sample.middle_metric().inverse().ok_or(AnomalyError::SingularMetric)?;
    let e_k = sample.exp_mk.recip().ok_or(AnomalyError::SingularMetric)?;
    let e2k = e_k.times(&e_k);
    let quarter_i = S::imag_unit().times(&S::from_q(&q(1, 4)));
    let coeff = contract(&sample.c, &ginv, &quarter_i.times(&e2k));
    let middle = contract(&sample.c, &minv, &quarter_i);
    let mut asymmetry: f64 = 0.0;
    let mut weight_residual: f64 = 0.0;
    for (m, w) in coeff.iter().zip(&middle) {
        asymmetry = asymmetry.max(mag(&m.sub(&m.transpose())));
        weight_residual = weight_residual.max(mag(&m.sub(w)));
    }
    Ok(MasterOperator { tau: sample.t.clone(), lambda_power: 2, e2k, coeff, middle, asymmetry, weight_residual })
}

// Parallel Gaussian states.

/// Endpoint of the transport of a holomorphic Gaussian exp(s + lᵀw + ½wᵀQw)
/// under dΨ = −λ² coeff_a dτ^a ∂_i∂_j Ψ, against the closed-form heat kernel.
#[derive(Clone, Debug)]
pub struct ParallelReport {
    pub steps: usize,
    pub lambda: f64,
    pub lambda_order: usize,
    pub end: GaussianState,
    pub exact: GaussianState,
    pub master_residual: f64,
    pub antiholomorphy_residual: f64,
}

#[derive(Clone, Debug)]
pub struct ParallelConvergence {
    pub reports: Vec<ParallelReport>,
    pub slope: f64,
}

fn cm(m: &Mat<C64>) -> CMat {
    CMat::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

fn coeff_at(chart: &SpecialChart, tau: C64) -> Result<CMat, AnomalyError> {
    let p = chart.point_t(tau)?;
    let s = chart.sample(&p)?;
    let op = master_operator(&s)?;
    Ok(cm(&op.coeff[0]))
}

fn state_rate(st: &GaussianState, m: &CMat) -> GaussianState {
    let qm = &st.q * m;
    GaussianState {
        q: &qm * &st.q * C64::new(2.0, 0.0),
        l: &qm * &st.l * C64::new(2.0, 0.0),
        s: (m * &st.q).trace() + (st.l.transpose() * m * &st.l)[(0, 0)],
    }
}

fn state_axpy(x: &GaussianState, h: f64, r: &GaussianState) -> GaussianState {
    let h = C64::new(h, 0.0);
    GaussianState { q: &x.q + &r.q * h, l: &x.l + &r.l * h, s: x.s + r.s * h }
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// ∫ coeff(τ) dτ along the polyline, composite 5-point Gauss–Legendre.
fn path_integral(chart: &SpecialChart, path: &[C64], panels: usize) -> Result<CMat, AnomalyError> {
    let mut nodes = Vec::new();
    for w in path.windows(2) {
        let d = w[1] - w[0];
        for p in 0..panels {
            let mid = (p as f64 + 0.5) / panels as f64;
            for &(x, wt) in &GL5 {
                let u = mid + 0.5 * x / panels as f64;
                nodes.push((w[0] + d * u, d * (0.5 * wt / panels as f64)));
            }
        }
    }
    let vals: Vec<CMat> = nodes.par_iter().map(|(t, _)| coeff_at(chart, *t)).collect::<Result<_, _>>()?;
    let n = vals[0].nrows();
    Ok(vals.iter().zip(&nodes).fold(CMat::zeros(n, n), |acc, (v, (_, w))| acc + v * *w))
}

/// Exact solution given I = ∫M: Q₁ = (1 − 2Q₀I)⁻¹Q₀, l₁ = (1 − 2Q₀I)⁻¹l₀,
/// s₁ = s₀ − ½ log det(1 − 2IQ₀) + l₀ᵀ(1 − 2IQ₀)⁻¹I l₀.
pub fn heat_kernel_state(st: &GaussianState, integral: &CMat) -> Result<GaussianState, AnomalyError> {
    let n = st.q.nrows();
    let two = C64::new(2.0, 0.0);
    let left = CMat::identity(n, n) - &st.q * integral * two;
    let right = CMat::identity(n, n) - integral * &st.q * two;
    let li = left.clone().try_inverse().ok_or(AnomalyError::SingularKernel)?;
    let ri = right.clone().try_inverse().ok_or(AnomalyError::SingularKernel)?;
    let q1 = &li * &st.q;
    let l1 = &li * &st.l;
    let s1 = st.s - right.determinant().ln() * 0.5 + (st.l.transpose() * &ri * integral * &st.l)[(0, 0)];
    Ok(GaussianState { q: (&q1 + q1.transpose()) * C64::new(0.5, 0.0), l: l1, s: s1 })
}

fn state_distance(a: &GaussianState, b: &GaussianState) -> f64 {
    let dq = (&a.q - &b.q).iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let dl = (&a.l - &b.l).iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let ds = a.s - b.s;
    let turns = (ds.im / (2.0 * std::f64::consts::PI)).round();
    let ds = C64::new(ds.re, ds.im - turns * 2.0 * std::f64::consts::PI).norm();
    let scale = 1.0 + b.q.iter().chain(b.l.iter()).fold(0.0f64, |m, x| m.max(x.norm()));
    dq.max(dl).max(ds) / scale
}

/// Transports `state` along the polyline `path` in τ with RK4, `steps` per segment,
/// and compares with the heat kernel built from the Gauss–Legendre integral of the
/// same coefficient. The second-order part enters only when `lambda_order ≥ 2`.
pub fn parallel_state_residual(
    chart: &SpecialChart,
    path: &[C64],
    state: &GaussianState,
    steps: usize,
    lambda: f64,
    lambda_order: usize,
) -> Result<ParallelReport, AnomalyError> {
    if steps == 0 {
        return Err(AnomalyError::NoSteps);
    }
    if path.len() < 2 {
        return Err(AnomalyError::ShortPath);
    }
    let n = (chart.frame.solutions.len() / 2).saturating_sub(1).max(1);
    if state.q.nrows() != n || state.l.len() != n {
        return Err(AnomalyError::Dimension(state.q.nrows(), n));
    }
    let weight = if lambda_order >= 2 { -lambda * lambda } else { 0.0 };
    let mut x = state.clone();
    let mut integral = CMat::zeros(n, n);
    for w in path.windows(2) {
        let d = w[1] - w[0];
        let h = 1.0 / steps as f64;
        let grid: Vec<C64> = (0..=2 * steps).map(|k| w[0] + d * (k as f64 * h / 2.0)).collect();
        let ms: Vec<CMat> = if weight == 0.0 {
            vec![CMat::zeros(n, n); grid.len()]
        } else {
            grid.par_iter().map(|t| coeff_at(chart, *t).map(|m| m * (d * weight))).collect::<Result<_, _>>()?
        };
        for k in 0..steps {
            let (m0, mh, m1) = (&ms[2 * k], &ms[2 * k + 1], &ms[2 * k + 2]);
            let k1 = state_rate(&x, m0);
            let k2 = state_rate(&state_axpy(&x, h / 2.0, &k1), mh);
            let k3 = state_rate(&state_axpy(&x, h / 2.0, &k2), mh);
            let k4 = state_rate(&state_axpy(&x, h, &k3), m1);
            let mut incr = state_axpy(&k1, 2.0, &k2);
            incr = state_axpy(&incr, 2.0, &k3);
            incr = state_axpy(&incr, 1.0, &k4);
            x = state_axpy(&x, h / 6.0, &incr);
            x.q = (&x.q + x.q.transpose()) * C64::new(0.5, 0.0);
        }
        if weight != 0.0 {
            integral += path_integral(chart, w, 16)? * C64::new(weight, 0.0);
        }
    }
    let exact = heat_kernel_state(state, &integral)?;
    let master_residual = state_distance(&x, &exact);
    let pol = Polarization::from_siegel(&(CMat::identity(n, n) * C64::new(0.0, 1.0)))?;
    let antiholomorphy_residual = x.to_full(&pol)?.holomorphy_residual(&pol);
    Ok(ParallelReport { steps, lambda, lambda_order, end: x, exact, master_residual, antiholomorphy_residual })
}

/// Step-refinement study; `slope` is the fitted order p in residual ∝ steps^{−p}.
pub fn parallel_convergence(
    chart: &SpecialChart,
    path: &[C64],
    state: &GaussianState,
    steps: &[usize],
    lambda: f64,
) -> Result<ParallelConvergence, AnomalyError> {
    let reports: Vec<ParallelReport> =
        steps.iter().map(|&k| parallel_state_residual(chart, path, state, k, lambda, 2)).collect::<Result<_, _>>()?;
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| ((r.steps as f64).ln(), r.master_residual.max(1e-300).ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(ParallelConvergence { reports, slope: -num / den })
}

// Formal λ-expansion.

/// Working cap on the total degree of intermediate polynomials.
pub const DEGREE_CAP: u32 = 160;

/// Z = exp(c·𝔉): c = ½ as in the master-equation form, c = 1 as in 𝔉 = Σ λ^{2g−2}F_g, Z = exp 𝔉.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZConvention {
    Witten,
    Bcov,
}

impl ZConvention {
    pub fn factor(self) -> Gq {
        match self {
            ZConvention::Witten => Gq::real(q(1, 2)),
            ZConvention::Bcov => Gq::one(),
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            ZConvention::Witten => "witten",
            ZConvention::Bcov => "bcov",
        }
    }
}

/// D_j = ∂_j in flat coordinates, or D̂_j = ∂_j − (2g−2)∂_jK on the λ^{2g−2} coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovariantDerivative {
    Flat,
    KahlerWeighted,
}

/// One-modulus toy data with polynomial entries in (τ, τ̄).
#[derive(Clone, Debug, PartialEq)]
pub struct ToySample {
    pub cbar: Poly,
    pub e2k: Gq,
    pub ginv: Gq,
    /// ∂_τK, used only by the Kähler-weighted derivative.
    pub dk: Poly,
}

impl ToySample {
    pub fn new(cbar: Poly, e2k: Gq, ginv: Gq, dk: Poly) -> Result<Self, AnomalyError> {
        for p in [&cbar, &dk] {
            if p.nvars != 2 {
                return Err(AnomalyError::NotOneModulus(p.nvars));
            }
        }
        Ok(ToySample { cbar: lift(&cbar), e2k, ginv, dk: lift(&dk) })
    }

    pub fn trivial() -> Self {
        ToySample { cbar: zero(), e2k: Gq::one(), ginv: Gq::one(), dk: zero() }
    }

    /// A = C̄ e^{2K} G^{τ̄τ} G^{τ̄τ}.
    pub fn coefficient(&self) -> Poly {
        self.cbar.scale(&self.e2k.times(&self.ginv).times(&self.ginv))
    }
}

/// F_1, …, F_{g_max} as exact polynomials in (τ, τ̄).
#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyFamily {
    pub f: Vec<Poly>,
}

fn zero() -> Poly {
    Poly::zero(2, DEGREE_CAP)
}

fn lift(p: &Poly) -> Poly {
    p.with_max_deg(DEGREE_CAP)
}

pub fn degree(p: &Poly) -> u32 {
    p.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max().unwrap_or(0)
}

fn pmul(a: &Poly, b: &Poly) -> Result<Poly, AnomalyError> {
    let d = degree(a) + degree(b);
    if d > DEGREE_CAP {
        return Err(AnomalyError::DegreeCap(d, DEGREE_CAP));
    }
    Ok(lift(&lift(a).mul(&lift(b))))
}

fn dt(p: &Poly) -> Poly {
    lift(&p.derivative(0))
}

fn dbar(p: &Poly) -> Poly {
    lift(&p.derivative(1))
}

/// Antiderivative in τ̄ with zero constant of integration.
pub fn integrate_bar(p: &Poly) -> Poly {
    let mut out = zero();
    for (e, c) in &p.terms {
        let mut f = e.clone();
        f[1] += 1;
        out = out.add(&Poly::monomial(2, DEGREE_CAP, f.clone(), c.times(&Gq::real(q(1, f[1] as i64)))));
    }
    out
}

fn gint(n: i64) -> Gq {
    Gq::int(n, 0)
}

/// D acting on the coefficient of λ^{2m}.
fn cov(p: &Poly, m: usize, sample: &ToySample, d: CovariantDerivative) -> Result<Poly, AnomalyError> {
    let base = dt(p);
    match d {
        CovariantDerivative::Flat => Ok(base),
        CovariantDerivative::KahlerWeighted => Ok(base.sub(&pmul(&sample.dk, p)?.scale(&gint(2 * m as i64)))),
    }
}

/// Σ_{r=1}^{g−1} D F_r · D F_{g−r}.
fn cross_sum(f: &[Poly], g: usize, sample: &ToySample, d: CovariantDerivative) -> Result<Poly, AnomalyError> {
    let mut acc = zero();
    for r in 1..g {
        let a = cov(&f[r - 1], r - 1, sample, d)?;
        let b = cov(&f[g - r - 1], g - r - 1, sample, d)?;
        acc = acc.add(&pmul(&a, &b)?);
    }
    Ok(acc)
}

/// D D F_{g−1}, both derivatives at weight 2g−4.
fn second(f: &[Poly], g: usize, sample: &ToySample, d: CovariantDerivative) -> Result<Poly, AnomalyError> {
    let once = cov(&f[g - 2], g - 2, sample, d)?;
    cov(&once, g - 2, sample, d)
}

impl FreeEnergyFamily {
    pub fn new(f: Vec<Poly>) -> Result<Self, AnomalyError> {
        if let Some(p) = f.iter().find(|p| p.nvars != 2) {
            return Err(AnomalyError::NotOneModulus(p.nvars));
        }
        Ok(FreeEnergyFamily { f: f.iter().map(lift).collect() })
    }

    pub fn zero(g_max: usize) -> Self {
        FreeEnergyFamily { f: vec![zero(); g_max] }
    }

    pub fn g_max(&self) -> usize {
        self.f.len()
    }

    pub fn genus(&self, g: usize) -> &Poly {
        &self.f[g - 1]
    }

    /// Builds F_2, …, F_{g_max} from F_1 so that the genus recursion holds exactly:
    /// F_g = ∫dτ̄ A (D D F_{g−1} + ½ Σ D F_r D F_{g−r}) + hol[g−2](τ).
    pub fn solve_z0(
        sample: &ToySample,
        f1: &Poly,
        holomorphic: &[Poly],
        g_max: usize,
        d: CovariantDerivative,
    ) -> Result<Self, AnomalyError> {
        let a = sample.coefficient();
        let half = Gq::real(q(1, 2));
        let mut f = vec![lift(f1)];
        for g in 2..=g_max {
            let rhs = second(&f, g, sample, d)?.add(&cross_sum(&f, g, sample, d)?.scale(&half));
            let mut fg = integrate_bar(&pmul(&a, &rhs)?);
            if let Some(h) = holomorphic.get(g - 2) {
                if h.terms.keys().any(|e| e[1] != 0) {
                    return Err(AnomalyError::NotOneModulus(h.nvars));
                }
                fg = fg.add(&lift(h));
            }
            f.push(fg);
        }
        Ok(FreeEnergyFamily { f })
    }

    /// 𝔉 as a series in u = λ²: coefficient m is F_{m+1}.
    pub fn lambda_series(&self) -> Vec<Poly> {
        self.f.clone()
    }

    /// Ẑ = Z·e^{−cF_1} to order u^{len−1}, via the partition (Bell) expansion
    /// Ẑ_m = Σ_{Σ k·m_k = m} Π_k (cF_{k+1})^{m_k} / m_k!.
    pub fn z_series(&self, conv: ZConvention, len: usize) -> Result<Vec<Poly>, AnomalyError> {
        let c = conv.factor();
        let a: Vec<Poly> = (0..len).map(|k| if k == 0 || k >= self.f.len() { zero() } else { self.f[k].scale(&c) }).collect();
        (0..len).map(|m| bell(&a, m)).collect()
    }
}

fn partitions(m: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if m == 0 {
        out.push(cur.clone());
        return;
    }
    for k in (1..=max_part.min(m)).rev() {
        cur.push(k);
        partitions(m - k, k, cur, out);
        cur.pop();
    }
}

fn bell(a: &[Poly], m: usize) -> Result<Poly, AnomalyError> {
    if m == 0 {
        return Ok(Poly::constant(2, DEGREE_CAP, Gq::one()));
    }
    let mut parts = Vec::new();
    partitions(m, m, &mut Vec::new(), &mut parts);
    let mut acc = zero();
    for p in parts {
        let mut term = Poly::constant(2, DEGREE_CAP, Gq::one());
        let mut denom: i64 = 1;
        let mut i = 0;
        while i < p.len() {
            let k = p[i];
            let mult = p[i..].iter().take_while(|&&x| x == k).count();
            for j in 1..=mult {
                term = pmul(&term, &a[k])?;
                denom *= j as i64;
            }
            i += mult;
        }
        acc = acc.add(&term.scale(&Gq::real(q(1, denom))));
    }
    Ok(acc)
}

/// exp of a series with zero constant term by m·B_m = Σ_k k·a_k·B_{m−k}.
pub fn exp_series_recurrence(a: &[Poly]) -> Result<Vec<Poly>, AnomalyError> {
    let mut b = vec![Poly::constant(2, DEGREE_CAP, Gq::one())];
    for m in 1..a.len() {
        let mut acc = zero();
        for k in 1..=m {
            acc = acc.add(&pmul(&a[k], &b[m - k])?.scale(&gint(k as i64)));
        }
        b.push(acc.scale(&Gq::real(q(1, m as i64))));
    }
    Ok(b)
}

fn series_mul(x: &[Poly], y: &[Poly]) -> Result<Vec<Poly>, AnomalyError> {
    let n = x.len().min(y.len());
    (0..n)
        .map(|m| (0..=m).try_fold(zero(), |acc, k| Ok(acc.add(&pmul(&x[k], &y[m - k])?))))
        .collect()
}

/// Inverse of a series with constant term 1.
fn series_inv(x: &[Poly]) -> Result<Vec<Poly>, AnomalyError> {
    let mut y = vec![Poly::constant(2, DEGREE_CAP, Gq::one())];
    for m in 1..x.len() {
        let mut acc = zero();
        for k in 1..=m {
            acc = acc.add(&pmul(&x[k], &y[m - k])?);
        }
        y.push(acc.scale(&gint(-1)));
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Z0Options {
    pub convention: ZConvention,
    pub derivative: CovariantDerivative,
}

impl Default for Z0Options {
    fn default() -> Self {
        Z0Options { convention: ZConvention::Witten, derivative: CovariantDerivative::Flat }
    }
}

/// Order-by-order comparison; vectors indexed by m for the coefficient of λ^{2m}
/// (genus g = m + 1), except `per_genus` whose entry m is genus m + 1 and is zero at m = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Z0Report {
    pub options: Z0Options,
    pub g_max: usize,
    /// ∂̄F_g − A(D D F_{g−1} + ½ Σ D F_r D F_{g−r}).
    pub per_genus: Vec<Poly>,
    /// (∂̄ − λ²A D D)Z / Z from the series of Z.
    pub linear: Vec<Poly>,
    /// The same from the genus recursion: c·per_genus + cross_terms, plus c∂̄F_1 at λ⁰.
    pub predicted: Vec<Poly>,
    pub discrepancy: Vec<Poly>,
    /// c∂̄F_1, the λ⁰ entry of `linear`.
    pub f1_term: Poly,
    /// c(½ − c)·A·Σ D F_r D F_{g−r}.
    pub cross_terms: Vec<Poly>,
    /// ∂̄𝔉 − ∂̄F_1 − (λ²/2) A (D D 𝔉 + (D𝔉)²) per order.
    pub bcov_form: Vec<Poly>,
}

impl Z0Report {
    pub fn per_genus_zero(&self) -> bool {
        self.per_genus.iter().all(Poly::is_zero)
    }
    pub fn discrepancy_zero(&self) -> bool {
        self.discrepancy.iter().all(Poly::is_zero)
    }
    /// The linear residual is c∂̄F_1 at λ⁰ and vanishes at every higher order.
    pub fn only_f1_term(&self) -> bool {
        self.linear[0] == self.f1_term && self.linear[1..].iter().all(Poly::is_zero)
    }
}

pub fn z0_equivalence_check(
    family: &FreeEnergyFamily,
    sample: &ToySample,
    g_max: usize,
    opts: Z0Options,
) -> Result<Z0Report, AnomalyError> {
    if g_max == 0 || g_max > family.g_max() {
        return Err(AnomalyError::InsufficientTruncation { requested: 2 * g_max.max(1) - 2, available: family.g_max() });
    }
    let d = opts.derivative;
    let c = opts.convention.factor();
    let half = Gq::real(q(1, 2));
    let a = sample.coefficient();
    let f = &family.f[..g_max];

    let mut per_genus = vec![zero()];
    let mut predicted = vec![dbar(&f[0]).scale(&c)];
    let mut cross_terms = vec![zero()];
    let mut bcov_form = vec![zero()];
    for g in 2..=g_max {
        let dd = second(f, g, sample, d)?;
        let cs = cross_sum(f, g, sample, d)?;
        let df = dbar(&f[g - 1]);
        per_genus.push(df.sub(&pmul(&a, &dd.add(&cs.scale(&half)))?));
        predicted.push(df.sub(&pmul(&a, &dd.add(&cs.scale(&c)))?).scale(&c));
        cross_terms.push(pmul(&a, &cs)?.scale(&c.times(&half.minus(&c))));
        bcov_form.push(df.sub(&pmul(&a, &dd.add(&cs))?.scale(&half)));
    }

    let zh = family.z_series(opts.convention, g_max)?;
    let zinv = series_inv(&zh)?;
    let mut dbar_log = series_mul(&zinv, &zh.iter().map(dbar).collect::<Vec<_>>())?;
    dbar_log[0] = dbar_log[0].add(&dbar(&f[0]).scale(&c));
    let dz: Vec<Poly> = zh.iter().enumerate().map(|(m, p)| cov(p, m, sample, d)).collect::<Result<_, _>>()?;
    let mut y = series_mul(&zinv, &dz)?;
    y[0] = y[0].add(&cov(&f[0], 0, sample, d)?.scale(&c));
    let dy: Vec<Poly> = y.iter().enumerate().map(|(m, p)| cov(p, m, sample, d)).collect::<Result<_, _>>()?;
    let yy = series_mul(&y, &y)?;
    let mut linear = vec![dbar_log[0].clone()];
    for m in 1..g_max {
        let ddz = yy[m - 1].add(&dy[m - 1]);
        linear.push(dbar_log[m].sub(&pmul(&a, &ddz)?));
    }

    let discrepancy = linear.iter().zip(&predicted).map(|(x, y)| x.sub(y)).collect();
    Ok(Z0Report {
        options: opts,
        g_max,
        per_genus,
        linear,
        predicted,
        discrepancy,
        f1_term: dbar(&f[0]).scale(&c),
        cross_terms,
        bcov_form,
    })
}

/// A seeded one-modulus toy: C̄ = c₀ + c₁τ̄, F_1 = τ τ̄ + τ̄², ambiguities f_g = τ^g.
pub fn toy_sample_and_family(g_max: usize, d: CovariantDerivative) -> Result<(ToySample, FreeEnergyFamily), AnomalyError> {
    let mono = |e: [u8; 2], c: Gq| Poly::monomial(2, DEGREE_CAP, e.to_vec(), c);
    let cbar = mono([0, 0], gint(5)).add(&mono([0, 1], Gq::real(q(1, 3))));
    let dk = mono([0, 1], Gq::real(q(-1, 2)));
    let sample = ToySample::new(cbar, Gq::real(q(1, 4)), Gq::real(q(2, 1)), dk)?;
    let f1 = mono([1, 1], Gq::one()).add(&mono([0, 2], gint(1)));
    let hol: Vec<Poly> = (2..=g_max).map(|g| mono([g as u8, 0], Gq::real(q(1, g as i64)))).collect();
    let fam = FreeEnergyFamily::solve_z0(&sample, &f1, &hol, g_max, d)?;
    Ok((sample, fam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard_fuchs::{frobenius_basis, PFOperator};
    use crate::quantization::CVec;
    use crate::special_geometry::Tensor3;
    use crate::torus::TorusGeometry;

    fn quintic_chart() -> SpecialChart {
        let f = frobenius_basis(&PFOperator::quintic(), 40, None).unwrap();
        SpecialChart::new(f, crate::scalar::qi(5), 1.6e-4).unwrap()
    }

    #[test]
    fn zero_yukawa_gives_trivial_operator() {
        let mut s = TorusGeometry::new().sample();
        s.c = Tensor3::from_fn(s.dim(), |_, _, _| Gq::zero());
        let op = master_operator(&s).unwrap();
        assert!(op.is_trivial());
        assert_eq!(op.weight_residual, 0.0);
    }

    #[test]
    fn torus_operator_exact_and_symmetric() {
        let s = TorusGeometry::new().sample();
        let op = master_operator(&s).unwrap();
        assert_eq!(op.e2k, Gq::real(q(1, 64)));
        for m in &op.coeff {
            assert_eq!(*m, m.transpose());
        }
        assert_eq!(op.coeff, op.middle);
        assert_eq!(op.asymmetry, 0.0);
    }

    #[test]
    fn one_modulus_matches_hand_formula() {
        let chart = quintic_chart();
        let p = chart.point_z(C64::new(1e-4, 0.0)).unwrap();
        let s = chart.sample(&p).unwrap();
        let op = master_operator(&s).unwrap();
        let g = s.g[(0, 0)];
        let c = *s.c.get(0, 0, 0);
        let hand = C64::new(0.0, 0.25) * (2.0 * s.k).exp() * c.conj() / (g * g);
        assert!((op.coeff[0][(0, 0)] - hand).norm() < 1e-12 * hand.norm());
        assert!(op.weight_residual < 1e-12 * hand.norm());
    }

    #[test]
    fn kahler_shift_scales_with_e2k() {
        let chart = quintic_chart();
        let s = chart.sample(&chart.point_z(C64::new(1e-4, 5e-5)).unwrap()).unwrap();
        let mut shifted = s.clone();
        shifted.k += 0.3;
        shifted.exp_mk = s.exp_mk * (-0.3f64).exp();
        let a = master_operator(&s).unwrap().coeff[0][(0, 0)];
        let b = master_operator(&shifted).unwrap().coeff[0][(0, 0)];
        assert!((b - a * (0.6f64).exp()).norm() < 1e-12 * b.norm());
    }

    #[test]
    fn singular_metric_is_rejected() {
        let mut s = TorusGeometry::new().sample();
        s.g = Mat::zeros(s.dim(), s.dim());
        assert_eq!(master_operator(&s).unwrap_err(), AnomalyError::SingularMetric);
    }

    fn seed_state() -> GaussianState {
        GaussianState {
            q: CMat::from_element(1, 1, C64::new(0.3, 0.2)),
            l: CVec::from_element(1, C64::new(0.5, -0.1)),
            s: C64::new(0.0, 0.0),
        }
    }

    fn short_path(chart: &SpecialChart) -> Vec<C64> {
        let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
        vec![t0, t0 + C64::new(0.02, 0.01)]
    }

    #[test]
    fn constant_path_is_identity() {
        let chart = quintic_chart();
        let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
        let r = parallel_state_residual(&chart, &[t0, t0], &seed_state(), 3, 1.0, 2).unwrap();
        assert_eq!(r.end, seed_state());
        assert_eq!(r.master_residual, 0.0);
    }

    #[test]
    fn vanishing_lambda_is_trivial_transport() {
        let chart = quintic_chart();
        let path = short_path(&chart);
        for (lambda, order) in [(0.0, 2), (3.0, 0)] {
            let r = parallel_state_residual(&chart, &path, &seed_state(), 4, lambda, order).unwrap();
            assert_eq!(r.end, seed_state());
        }
    }

    #[test]
    fn quintic_parallel_state_converges_at_fourth_order() {
        let chart = quintic_chart();
        let path = short_path(&chart);
        let c0 = coeff_at(&chart, path[0]).unwrap()[(0, 0)];
        let lambda = (0.5 / (c0.norm() * 0.0224)).sqrt();
        let conv = parallel_convergence(&chart, &path, &seed_state(), &[4, 8, 16, 32], lambda).unwrap();
        assert!((conv.slope - 4.0).abs() < 0.3, "slope {}", conv.slope);
        let r = parallel_state_residual(&chart, &path, &seed_state(), 1000, lambda, 2).unwrap();
        assert!(r.master_residual <= 1e-5 && r.antiholomorphy_residual <= 1e-5, "{r:?}");
    }

    #[test]
    fn heat_kernel_composes() {
        let st = seed_state();
        let i1 = CMat::from_element(1, 1, C64::new(0.1, -0.2));
        let i2 = CMat::from_element(1, 1, C64::new(-0.05, 0.3));
        let a = heat_kernel_state(&heat_kernel_state(&st, &i1).unwrap(), &i2).unwrap();
        let b = heat_kernel_state(&st, &(&i1 + &i2)).unwrap();
        assert!(state_distance(&a, &b) < 1e-14);
    }

    fn mono(e: [u8; 2], c: Gq) -> Poly {
        Poly::monomial(2, DEGREE_CAP, e.to_vec(), c)
    }

    #[test]
    fn trivial_family_has_zero_residuals() {
        let r = z0_equivalence_check(&FreeEnergyFamily::zero(3), &ToySample::trivial(), 3, Z0Options::default()).unwrap();
        assert!(r.per_genus_zero() && r.discrepancy_zero());
        assert!(r.linear.iter().all(Poly::is_zero));
    }

    #[test]
    fn constructed_family_satisfies_recursion_and_shows_f1_pattern() {
        for d in [CovariantDerivative::Flat, CovariantDerivative::KahlerWeighted] {
            let (sample, fam) = toy_sample_and_family(3, d).unwrap();
            let opts = Z0Options { convention: ZConvention::Witten, derivative: d };
            let r = z0_equivalence_check(&fam, &sample, 3, opts).unwrap();
            assert!(r.per_genus_zero());
            assert!(r.discrepancy_zero());
            assert!(!r.f1_term.is_zero());
            assert!(r.only_f1_term());
            assert_eq!(r.f1_term, dbar(fam.genus(1)).scale(&Gq::real(q(1, 2))));
            let b = z0_equivalence_check(&fam, &sample, 3, Z0Options { convention: ZConvention::Bcov, derivative: d }).unwrap();
            assert!(b.per_genus_zero() && b.discrepancy_zero());
            assert_eq!(b.linear[0], dbar(fam.genus(1)));
            assert!(!b.linear[1].is_zero());
            assert_eq!(b.linear[2], b.cross_terms[2]);
        }
    }

    #[test]
    fn bcov_form_drops_the_f1_term() {
        let (sample, fam) = toy_sample_and_family(3, CovariantDerivative::Flat).unwrap();
        let r = z0_equivalence_check(&fam, &sample, 3, Z0Options::default()).unwrap();
        assert!(r.bcov_form[0].is_zero());
        let a = sample.coefficient();
        for g in 2..=3 {
            let half_dd = pmul(&a, &second(&fam.f, g, &sample, CovariantDerivative::Flat).unwrap()).unwrap().scale(&Gq::real(q(1, 2)));
            assert_eq!(r.bcov_form[g - 1], half_dd);
        }
    }

    #[test]
    fn broken_family_is_detected() {
        let (sample, mut fam) = toy_sample_and_family(3, CovariantDerivative::Flat).unwrap();
        fam.f[2] = fam.f[2].add(&mono([1, 1], Gq::one()));
        let r = z0_equivalence_check(&fam, &sample, 3, Z0Options::default()).unwrap();
        assert!(!r.per_genus_zero());
        assert!(r.discrepancy_zero());
        assert_eq!(r.per_genus[2], mono([1, 0], Gq::one()));
    }

    #[test]
    fn bell_expansion_matches_recurrence() {
        let (_, fam) = toy_sample_and_family(5, CovariantDerivative::Flat).unwrap();
        for conv in [ZConvention::Witten, ZConvention::Bcov] {
            let z = fam.z_series(conv, 5).unwrap();
            let a: Vec<Poly> = (0..5).map(|k| if k == 0 { zero() } else { fam.f[k].scale(&conv.factor()) }).collect();
            assert_eq!(z, exp_series_recurrence(&a).unwrap());
        }
    }

    #[test]
    fn z_coefficient_at_lambda_four_is_bell_by_hand() {
        let (_, fam) = toy_sample_and_family(3, CovariantDerivative::Flat).unwrap();
        let z = fam.z_series(ZConvention::Bcov, 3).unwrap();
        let expect = fam.f[2].add(&fam.f[1].mul(&fam.f[1]).scale(&Gq::real(q(1, 2))));
        assert_eq!(z[2], lift(&expect));
    }

    #[test]
    fn insufficient_truncation_is_an_error() {
        let (sample, fam) = toy_sample_and_family(2, CovariantDerivative::Flat).unwrap();
        assert!(matches!(
            z0_equivalence_check(&fam, &sample, 3, Z0Options::default()),
            Err(AnomalyError::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn integrate_bar_inverts_dbar() {
        let p = mono([2, 3], Gq::int(1, 2)).add(&mono([0, 1], gint(7)));
        assert_eq!(dbar(&integrate_bar(&p)), p);
    }
}
