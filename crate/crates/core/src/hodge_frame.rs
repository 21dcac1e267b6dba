//! Hodge structures on H³: the Weil operator, the extended period domain, its
//! indefinite metric, contact forms, rational planes, lattices and period matrices.

use crate::connections::{quintic_frame_connection, ConnectionError};
use crate::linalg::{inertia_q, Mat};
use crate::picard_fuchs::rank_mod_line;
use crate::scalar::{q, ComplexScalar, Gq, Scalar, C64, Q};
use crate::special_geometry::{GeometryError, SpecialChart};
use crate::torus::{TorusGeometry, N};
use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::Signed;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error("Hodge pieces do not span H3")]
    RankDeficient,
    #[error("frame invariant '{0}' violated: {1:e}")]
    Invariant(&'static str, f64),
    #[error("pairing restricted to the plane is not positive: <gamma,mu> = {0}")]
    NonPositivePlane(String),
    #[error("degenerate plane")]
    DegeneratePlane,
    #[error("tangent vector not in the quadric tangent space: residual {0:e}")]
    NotTangent(f64),
    #[error("chart coordinate z_{0} vanishes at this point")]
    ChartZero(usize),
    #[error("no positive rational plane with denominators <= {0}")]
    NoRationalPlane(u64),
    #[error("Gram entry {0:e} away from an integer after transport")]
    NonIntegralGram(f64),
    #[error("lattice Gram matrix is not integral and antisymmetric")]
    BadLattice,
    #[error("polarization is not positive")]
    NonPositivePolarization,
    #[error("symplectic form is degenerate or not antisymmetric")]
    BadSymplectic,
    #[error("step {0} outside [1e-5, 1e-2]")]
    BadStep(f64),
    #[error("dimension mismatch: expected {0}, got {1}")]
    Dimension(usize, usize),
}

/// H³(M, ℤ)/Tor with its intersection form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticSpace {
    pub omega: Mat<Q>,
    pub labels: Vec<String>,
}

impl SymplecticSpace {
    pub fn new(omega: Mat<Q>, labels: Vec<String>) -> Result<Self, HodgeError> {
        let n = omega.rows;
        if omega.cols != n || n % 2 != 0 || labels.len() != n {
            return Err(HodgeError::BadSymplectic);
        }
        for a in 0..n {
            for b in 0..n {
                if omega[(a, b)] != -omega[(b, a)].clone() {
                    return Err(HodgeError::BadSymplectic);
                }
            }
        }
        if omega.det().is_zero() {
            return Err(HodgeError::BadSymplectic);
        }
        Ok(SymplecticSpace { omega, labels })
    }

    /// Basis γ_0..γ_n, μ_0..μ_n with ⟨γ_i, μ_j⟩ = δ_ij.
    pub fn standard(pairs: usize) -> Self {
        let n = 2 * pairs;
        let omega = Mat::from_fn(n, n, |a, b| {
            if b == a + pairs {
                Q::one()
            } else if a == b + pairs {
                -Q::one()
            } else {
                Q::zero()
            }
        });
        let mut labels: Vec<String> = (0..pairs).map(|i| format!("gamma{i}")).collect();
        labels.extend((0..pairs).map(|i| format!("mu{i}")));
        SymplecticSpace { omega, labels }
    }

    pub fn dim(&self) -> usize {
        self.omega.rows
    }

    pub fn pair_q(&self, u: &[Q], v: &[Q]) -> Q {
        self.omega.bilinear(u, v)
    }

    pub fn pair<S: Scalar>(&self, u: &[S], v: &[S]) -> S {
        self.omega.map(|x| S::from_q(x)).bilinear(u, v)
    }
}

/// Weil eigenvalue i^{p−q} on H^{p,3−p}.
pub fn weil_eigenvalue<S: ComplexScalar>(p: i32) -> S {
    let i = S::imag_unit();
    if p % 2 == 1 {
        i.negate()
    } else {
        i
    }
}

/// H³⊗ℂ = H^{3,0} ⊕ H^{2,1} ⊕ H^{1,2} ⊕ H^{0,3} with J and the metric built from Q.
#[derive(Clone, Debug)]
pub struct HodgeFrame<S> {
    pub h30: Vec<Vec<S>>,
    pub h21: Vec<Vec<S>>,
    pub h12: Vec<Vec<S>>,
    pub h03: Vec<Vec<S>>,
    pub pairing: Mat<S>,
    /// Columns h30, h21, h12, h03.
    pub basis: Mat<S>,
    pub basis_inv: Mat<S>,
    pub j: Mat<S>,
    /// G(x, y) = −iQ(x₃₀, ȳ₃₀) − iQ(x₂₁, ȳ₂₁) + iQ(x₁₂, ȳ₁₂) + iQ(x₀₃, ȳ₀₃) on the coordinate basis.
    pub gmetric: Mat<S>,
}

/// Largest violation of each frame invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameInvariants {
    pub j_square: f64,
    pub q_invariance: f64,
    pub orthogonality: f64,
    pub j_reality: f64,
    pub gmetric_symmetry: f64,
}

impl FrameInvariants {
    pub fn max(&self) -> f64 {
        [self.j_square, self.q_invariance, self.orthogonality, self.j_reality, self.gmetric_symmetry].into_iter().fold(0.0, f64::max)
    }
}

fn conj_vec<S: ComplexScalar>(v: &[S]) -> Vec<S> {
    v.iter().map(|x| x.conjugate()).collect()
}

fn max_entry<S: Scalar>(m: &Mat<S>) -> f64 {
    let mut x: f64 = 0.0;
    for r in 0..m.rows {
        for c in 0..m.cols {
            x = x.max(m[(r, c)].magnitude());
        }
    }
    x
}

impl<S: ComplexScalar> HodgeFrame<S> {
    /// Builds the frame from H^{3,0} and H^{2,1}; the other pieces are conjugates.
    pub fn from_pieces(h30: Vec<Vec<S>>, h21: Vec<Vec<S>>, pairing: Mat<S>) -> Result<Self, HodgeError> {
        let h12: Vec<Vec<S>> = h21.iter().map(|v| conj_vec(v)).collect();
        let h03: Vec<Vec<S>> = h30.iter().map(|v| conj_vec(v)).collect();
        let cols: Vec<Vec<S>> = h30.iter().chain(&h21).chain(&h12).chain(&h03).cloned().collect();
        let dim = pairing.rows;
        if cols.len() != dim || cols.iter().any(|c| c.len() != dim) {
            return Err(HodgeError::Dimension(dim, cols.len()));
        }
        let basis = Mat::from_cols(&cols);
        let basis_inv = basis.inverse().ok_or(HodgeError::RankDeficient)?;
        let mut f = HodgeFrame { h30, h21, h12, h03, pairing, basis, basis_inv, j: Mat::zeros(dim, dim), gmetric: Mat::zeros(dim, dim) };
        let gr = f.grading();
        let d = Mat::from_fn(dim, dim, |r, c| if r == c { weil_eigenvalue::<S>(gr[r]) } else { S::zero() });
        f.j = f.basis.mul(&d).mul(&f.basis_inv);
        // W[r][r'] = s_p Q(col_r, conj col_r') within one piece
        let i = S::imag_unit();
        let w = Mat::from_fn(dim, dim, |r, rp| {
            if gr[r] != gr[rp] {
                return S::zero();
            }
            let s = if gr[r] >= 2 { i.negate() } else { i.clone() };
            s.times(&f.pairing.bilinear(&cols[r], &conj_vec(&cols[rp])))
        });
        let binv_conj = f.basis_inv.map(|x| x.conjugate());
        f.gmetric = f.basis_inv.transpose().mul(&w).mul(&binv_conj);
        Ok(f)
    }

    pub fn grading(&self) -> Vec<i32> {
        let mut g = vec![3; self.h30.len()];
        g.extend(std::iter::repeat(2).take(self.h21.len()));
        g.extend(std::iter::repeat(1).take(self.h12.len()));
        g.extend(std::iter::repeat(0).take(self.h03.len()));
        g
    }

    pub fn dim(&self) -> usize {
        self.pairing.rows
    }

    /// Coordinates of v in the Hodge basis.
    pub fn coordinates(&self, v: &[S]) -> Vec<S> {
        self.basis_inv.mul_vec(v)
    }

    pub fn invariants(&self) -> FrameInvariants {
        let n = self.dim();
        let id = Mat::<S>::identity(n);
        let j2 = self.j.mul(&self.j).add(&id);
        let qinv = self.j.transpose().mul(&self.pairing).mul(&self.j).sub(&self.pairing);
        let gr = self.grading();
        let cols: Vec<Vec<S>> = (0..n).map(|c| self.basis.col(c)).collect();
        let mut orth: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let v = self.pairing.bilinear(&cols[a], &cols[b]).magnitude();
                scale = scale.max(v);
                if gr[a] + gr[b] != 3 {
                    orth = orth.max(v);
                }
            }
        }
        let jr = self.j.map(|x| x.minus(&x.conjugate()));
        let gs = self.gmetric.sub(&self.gmetric.transpose());
        let gscale = max_entry(&self.gmetric).max(f64::MIN_POSITIVE);
        let pscale = max_entry(&self.pairing).max(f64::MIN_POSITIVE);
        let jscale = max_entry(&self.j).max(1.0);
        FrameInvariants {
            j_square: max_entry(&j2) / (jscale * jscale),
            q_invariance: max_entry(&qinv) / (pscale * jscale * jscale),
            orthogonality: if scale > 0.0 { orth / scale } else { 0.0 },
            j_reality: max_entry(&jr) / jscale,
            gmetric_symmetry: max_entry(&gs) / gscale + max_entry(&self.gmetric.map(|x| x.minus(&x.conjugate()))) / gscale,
        }
    }

    /// Validates every invariant to the given relative tolerance.
    pub fn check(&self, tol: f64) -> Result<(), HodgeError> {
        let inv = self.invariants();
        for (name, v) in [
            ("J^2 = -1", inv.j_square),
            ("Q(Ju,Jv) = Q(u,v)", inv.q_invariance),
            ("Hodge pieces Q-orthogonal", inv.orthogonality),
            ("J real", inv.j_reality),
            ("Gmetric real symmetric", inv.gmetric_symmetry),
        ] {
            if v > tol {
                return Err(HodgeError::Invariant(name, v));
            }
        }
        Ok(())
    }
}

impl HodgeFrame<Gq> {
    /// Exact inertia (n₊, n₋, n₀) of the metric.
    pub fn signature(&self) -> (usize, usize, usize) {
        assert!(self.gmetric.map(|x| Gq::real(x.im.clone())).is_zero(), "metric is real");
        inertia_q(&self.gmetric.map(|x| x.re.clone()))
    }
}

impl HodgeFrame<C64> {
    pub fn signature(&self) -> (usize, usize, usize) {
        signature_f64(&self.gmetric.map(|x| C64::new(x.re, 0.0)))
    }
}

/// Eigenvalue sign count of a real symmetric matrix stored as complex.
pub fn signature_f64(m: &Mat<C64>) -> (usize, usize, usize) {
    let n = m.rows;
    let d = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
    let ev = d.symmetric_eigen().eigenvalues;
    let scale = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-10 * scale;
    let pos = ev.iter().filter(|x| **x > tol).count();
    let neg = ev.iter().filter(|x| **x < -tol).count();
    (pos, neg, n - pos - neg)
}

/// Hodge frame of the one-modulus special chart at flat coordinate t0:
/// H^{3,0} = Π, H^{2,1} = ∂Π + (∂K)Π.
pub fn frame_from_periods(chart: &SpecialChart, t0: C64) -> Result<HodgeFrame<C64>, HodgeError> {
    let p = chart.point_t(t0)?;
    let ks = chart.k_series(&p, true, 3)?;
    let kt = ks.deriv(1, 0);
    let pi = p.d_eta(0);
    let d1 = p.d_eta(1);
    if rank_mod_line(&pi, &[d1.clone()]) < 1 {
        return Err(HodgeError::RankDeficient);
    }
    let dpi: Vec<C64> = pi.iter().zip(&d1).map(|(a, b)| b + kt * a).collect();
    let f = HodgeFrame::from_pieces(vec![pi], vec![dpi], chart.sigma.clone())?;
    f.check(1e-10)?;
    Ok(f)
}

/// Exact Hodge frame of the torus fixture at τ = 0.
pub fn torus_frame(geom: &TorusGeometry) -> Result<HodgeFrame<Gq>, HodgeError> {
    let (b0, _, _) = geom.frame_jets();
    let h30 = vec![b0.col(0)];
    let h21 = (1..=N).map(|c| b0.col(c)).collect();
    let f = HodgeFrame::from_pieces(h30, h21, geom.pairing.clone())?;
    f.check(0.0)?;
    Ok(f)
}

/// Finite-difference (∂J)(DΩ) against the closed forms C g⁻¹ and e^K C G⁻¹.
#[derive(Clone, Debug)]
pub struct DjReport {
    pub h: f64,
    /// Component of (∂_tJ)(DΩ) along conj(DΩ).
    pub measured: C64,
    /// C·g⁻¹ with C = √−1∫Ω∧∂³Ω and g = e^{−K}G.
    pub wit12: C64,
    /// e^K·C·G⁻¹.
    pub wit15: C64,
    pub residual12: f64,
    pub residual15: f64,
    /// measured / wit12.
    pub ratio: C64,
    /// Residual against 2√−1·C g⁻¹.
    pub corrected_residual: f64,
}

fn weil_at(chart: &SpecialChart, t: C64) -> Result<Mat<C64>, HodgeError> {
    Ok(frame_from_periods(chart, t)?.j)
}

/// ∂_t J at t0 by centred differences in the real directions, ∂_t = ½(∂_x − i∂_y).
pub fn dj_fd(chart: &SpecialChart, t0: C64, h: f64) -> Result<Mat<C64>, HodgeError> {
    let jxp = weil_at(chart, t0 + C64::new(h, 0.0))?;
    let jxm = weil_at(chart, t0 - C64::new(h, 0.0))?;
    let jyp = weil_at(chart, t0 + C64::new(0.0, h))?;
    let jym = weil_at(chart, t0 - C64::new(0.0, h))?;
    let dx = jxp.sub(&jxm);
    let dy = jyp.sub(&jym);
    Ok(dx.sub(&dy.scale(&C64::new(0.0, 1.0))).scale(&C64::new(1.0 / (4.0 * h), 0.0)))
}

pub fn dj_check(chart: &SpecialChart, t0: C64, h: f64) -> Result<DjReport, HodgeError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(HodgeError::BadStep(h));
    }
    let f = frame_from_periods(chart, t0)?;
    let dj = dj_fd(chart, t0, h)?;
    let m = f.basis_inv.mul(&dj).mul(&f.basis);
    let measured = m[(2, 1)];
    let p = chart.point_t(t0)?;
    let s = chart.sample(&p)?;
    let i = C64::new(0.0, 1.0);
    let c_paper = -i * *s.c.get(0, 0, 0);
    let dpi = f.h21[0].clone();
    let g_small = i * chart.q(&dpi, &conj_vec(&dpi));
    let wit12 = c_paper / g_small;
    let wit15 = c_paper / (s.exp_mk * s.g[(0, 0)]);
    let rel = |a: C64, b: C64| (a - b).norm() / b.norm();
    Ok(DjReport {
        h,
        measured,
        wit12,
        wit15,
        residual12: rel(measured, wit12),
        residual15: rel(measured, wit15),
        ratio: measured / wit12,
        corrected_residual: rel(measured, C64::new(0.0, 2.0) * wit12),
    })
}

/// dJ at h, h/2, h/4 with the observed order of the finite-difference error.
#[derive(Clone, Debug)]
pub struct DjConvergence {
    pub reports: Vec<DjReport>,
    pub slope: f64,
    /// Richardson value (4M_{h/2} − M_h)/3.
    pub extrapolated: C64,
}

pub fn dj_convergence(chart: &SpecialChart, t0: C64, h: f64) -> Result<DjConvergence, HodgeError> {
    let reports: Vec<DjReport> = [h, h / 2.0, h / 4.0].iter().map(|&s| dj_check(chart, t0, s)).collect::<Result<_, _>>()?;
    let e1 = (reports[0].measured - reports[1].measured).norm();
    let e2 = (reports[1].measured - reports[2].measured).norm();
    let extrapolated = (reports[1].measured * 4.0 - reports[0].measured) / 3.0;
    Ok(DjConvergence { slope: (e1 / e2).log2(), extrapolated, reports })
}

/// Exact (∂_iJ)(D_jΩ) on the torus fixture, component along conj(D_lΩ), index (i, j, l).
#[derive(Clone, Debug)]
pub struct TorusDj {
    pub measured: Vec<Gq>,
    pub wit12: Vec<Gq>,
    pub wit15: Vec<Gq>,
    /// measured / wit12 when it is the same constant on every nonzero entry.
    pub ratio: Option<Gq>,
}

impl TorusDj {
    pub fn get(v: &[Gq], i: usize, j: usize, l: usize) -> &Gq {
        &v[(i * N + j) * N + l]
    }
}

pub fn torus_dj(geom: &TorusGeometry) -> TorusDj {
    let (conn, _) = crate::connections::torus_frame_connection(geom);
    let gr = &conn.grading;
    let i_unit = Gq::i();
    let (b0, _, _) = geom.frame_jets();
    let d: Vec<Vec<Gq>> = (1..=N).map(|c| b0.col(c)).collect();
    let g_small = Mat::from_fn(N, N, |k, l| i_unit.times(&geom.q(&d[k], &conj_vec(&d[l]))));
    let ginv = g_small.inverse().expect("metric nondegenerate");
    let big_g = geom.metric();
    let big_ginv = big_g.inverse().expect("metric nondegenerate");
    let ek = Gq::real(Q::one() / &geom.exp_mk0);
    let yuk = geom.yukawa();
    let c_paper = |a: usize, b: usize, c: usize| yuk.get(a, b, c).times(&i_unit.negate());
    let mut measured = Vec::with_capacity(N * N * N);
    let mut wit12 = Vec::with_capacity(N * N * N);
    let mut wit15 = Vec::with_capacity(N * N * N);
    for i in 0..N {
        // [A_i, D] applied to e_{1+j}, row 1+N+l: A_i[r][1+j](λ_{1+j} − λ_r)
        let a = &conn.a_hol[i];
        for j in 0..N {
            for l in 0..N {
                let r = 1 + N + l;
                let col = 1 + j;
                let lam_c: Gq = weil_eigenvalue(gr[col]);
                let lam_r: Gq = weil_eigenvalue(gr[r]);
                measured.push(a[(r, col)].times(&lam_c.minus(&lam_r)));
                let mut x = Gq::zero();
                let mut y = Gq::zero();
                for k in 0..N {
                    x = x.plus(&c_paper(i, j, k).times(&ginv[(l, k)]));
                    y = y.plus(&c_paper(i, j, k).times(&big_ginv[(l, k)]));
                }
                wit12.push(x);
                wit15.push(y.times(&ek));
            }
        }
    }
    let mut ratio: Option<Gq> = None;
    let mut consistent = true;
    for (m, w) in measured.iter().zip(&wit12) {
        if w.is_zero() {
            consistent &= m.is_zero();
            continue;
        }
        let r = m.div(w).expect("nonzero");
        match &ratio {
            None => ratio = Some(r),
            Some(r0) => consistent &= *r0 == r,
        }
    }
    TorusDj { measured, wit12, wit15, ratio: if consistent { ratio } else { None } }
}

/// A point of the extended period domain with its weight-two filtration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoint {
    pub gamma: Vec<Q>,
    pub mu: Vec<Q>,
    /// Ω_E = μ + √−1γ.
    pub omega: Vec<Gq>,
    /// −√−1 Q(Ω, Ω̄) = 2⟨γ, μ⟩.
    pub norm: Q,
    /// Lowest-index symplectic completion (γ_i, μ_i), i ≥ 1, with ⟨γ_i, μ_i⟩ = −1.
    pub completion: Vec<(Vec<Q>, Vec<Q>)>,
    pub h20: Vec<Vec<Gq>>,
    pub h11: Vec<Vec<Gq>>,
    pub h02: Vec<Vec<Gq>>,
}

/// x − (⟨x,b⟩/s)a − (⟨a,x⟩/s)b, the projection onto the complement of span(a, b), s = ⟨a,b⟩.
fn project_off(space: &SymplecticSpace, x: &[Q], a: &[Q], b: &[Q]) -> Vec<Q> {
    let s = space.pair_q(a, b);
    let ca = space.pair_q(x, b) / &s;
    let cb = space.pair_q(a, x) / &s;
    x.iter().zip(a).zip(b).map(|((xi, ai), bi)| xi - &ca * ai - &cb * bi).collect()
}

fn complexify(v: &[Q]) -> Vec<Gq> {
    v.iter().map(|x| Gq::real(x.clone())).collect()
}

/// Oriented plane E = span(γ, μ) with ⟨γ, μ⟩ > 0 ↦ [Ω_E], Ω_E = μ + √−1γ.
pub fn extended_point(space: &SymplecticSpace, gamma: &[Q], mu: &[Q]) -> Result<ExtendedPoint, HodgeError> {
    let n = space.dim();
    if gamma.len() != n || mu.len() != n {
        return Err(HodgeError::Dimension(n, gamma.len().min(mu.len())));
    }
    if Mat::from_rows(vec![gamma.to_vec(), mu.to_vec()]).rank() < 2 {
        return Err(HodgeError::DegeneratePlane);
    }
    let s = space.pair_q(gamma, mu);
    if !s.is_positive() {
        return Err(HodgeError::NonPositivePlane(crate::scalar::render_q(&s)));
    }
    let omega: Vec<Gq> = gamma.iter().zip(mu).map(|(g, m)| Gq::new(m.clone(), g.clone())).collect();
    let mut cands: Vec<Vec<Q>> = (0..n)
        .map(|k| {
            let e: Vec<Q> = (0..n).map(|i| if i == k { Q::one() } else { Q::zero() }).collect();
            project_off(space, &e, gamma, mu)
        })
        .collect();
    let mut completion = Vec::new();
    while let Some(ia) = cands.iter().position(|v| v.iter().any(|x| !x.is_zero())) {
        let a = cands[ia].clone();
        let Some(ib) = cands.iter().position(|v| !space.pair_q(&a, v).is_zero()) else {
            return Err(HodgeError::BadSymplectic);
        };
        let b = cands[ib].clone();
        let ab = space.pair_q(&a, &b);
        // ⟨γ_i, μ_i⟩ = −1
        let mu_i: Vec<Q> = b.iter().map(|x| -(x / &ab)).collect();
        for c in cands.iter_mut() {
            *c = project_off(space, c, &a, &mu_i);
        }
        completion.push((a, mu_i));
    }
    let h11 = completion.iter().flat_map(|(g, m)| [complexify(g), complexify(m)]).collect();
    Ok(ExtendedPoint {
        gamma: gamma.to_vec(),
        mu: mu.to_vec(),
        h02: vec![conj_vec(&omega)],
        h20: vec![omega.clone()],
        omega,
        norm: s * Q::from_integer(2.into()),
        completion,
        h11,
    })
}

impl ExtendedPoint {
    /// The weight-three Hodge frame with H^{2,1} = span(μ_i + √−1γ_i).
    pub fn hodge_frame(&self, space: &SymplecticSpace) -> Result<HodgeFrame<Gq>, HodgeError> {
        let h21 = self.completion.iter().map(|(g, m)| g.iter().zip(m).map(|(a, b)| Gq::new(b.clone(), a.clone())).collect()).collect();
        let f = HodgeFrame::from_pieces(vec![self.omega.clone()], h21, space.omega.map(|x| Gq::real(x.clone())))?;
        f.check(0.0)?;
        Ok(f)
    }

    /// −√−1 Q(Ω, Ω̄) computed directly.
    pub fn hermitian_norm(&self, space: &SymplecticSpace) -> Gq {
        space.pair(&self.omega, &conj_vec(&self.omega)).times(&Gq::int(0, -1))
    }

    pub fn isotropy(&self, space: &SymplecticSpace) -> Gq {
        space.pair(&self.omega, &self.omega)
    }
}

/// Inverse of [`extended_point`]: (γ, μ) = (Im Ω, Re Ω).
pub fn plane_of_point(omega: &[Gq]) -> (Vec<Q>, Vec<Q>) {
    (omega.iter().map(|x| x.im.clone()).collect(), omega.iter().map(|x| x.re.clone()).collect())
}

/// Value of dα_i on two tangent vectors at the point with lift z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactValue {
    pub chart: usize,
    /// Σ ω_kl dt_k(υ) dt_l(μ) in the affine coordinates t_k = z_k/z_i.
    pub raw: C64,
    /// raw·z_i², the value on the lift normalised by z_i = 1.
    pub lifted: C64,
    pub pairing: C64,
}

/// dα_i(υ, μ) in the chart z_i ≠ 0; the tangents must satisfy Q(υ, z) = Q(υ, z̄) = 0.
pub fn contact_form_eval(space: &SymplecticSpace, z: &[C64], chart: usize, u: &[C64], v: &[C64]) -> Result<ContactValue, HodgeError> {
    let n = space.dim();
    for x in [z, u, v] {
        if x.len() != n {
            return Err(HodgeError::Dimension(n, x.len()));
        }
    }
    let norm = |x: &[C64]| x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let zn = norm(z);
    if chart >= n || z[chart].norm() <= 1e-12 * zn {
        return Err(HodgeError::ChartZero(chart));
    }
    let om = space.omega.to_c64();
    let zb: Vec<C64> = z.iter().map(|x| x.conj()).collect();
    for w in [u, v] {
        let r = om.bilinear(w, z).norm().max(om.bilinear(w, &zb).norm()) / (norm(w) * zn).max(f64::MIN_POSITIVE);
        if r > 1e-10 {
            return Err(HodgeError::NotTangent(r));
        }
    }
    let zi = z[chart];
    let dt = |w: &[C64]| -> Vec<C64> { (0..n).map(|k| (w[k] * zi - z[k] * w[chart]) / (zi * zi)).collect() };
    let du = dt(u);
    let dv = dt(v);
    let raw = om.bilinear(&du, &dv);
    Ok(ContactValue { chart, raw, lifted: raw * zi * zi, pairing: om.bilinear(u, v) })
}

/// Largest disagreement of the lifted value across all charts with |z_i| not small.
pub fn contact_chart_agreement(space: &SymplecticSpace, z: &[C64], u: &[C64], v: &[C64]) -> Result<(Vec<ContactValue>, f64), HodgeError> {
    let zn = z.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let vals: Vec<ContactValue> =
        (0..z.len()).filter(|&i| z[i].norm() > 1e-3 * zn).map(|i| contact_form_eval(space, z, i, u, v)).collect::<Result<_, _>>()?;
    let mut d: f64 = 0.0;
    for a in &vals {
        for b in &vals {
            d = d.max((a.lifted - b.lifted).norm());
        }
    }
    Ok((vals, d))
}

/// Rational approximation of an oriented real plane.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPlane {
    pub gamma: Vec<Q>,
    pub mu: Vec<Q>,
    /// ⟨γ, μ⟩ ∈ ℤ_{>0}.
    pub pairing: Q,
    /// Sine of the largest principal angle to the target plane.
    pub distance: f64,
    pub bound: u64,
}

/// Best rational approximation p/q of x with q ≤ bound (convergents and semiconvergents).
pub fn best_rational(x: f64, bound: u64) -> Q {
    let bound = bound.max(1) as i128;
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    let mut best = (x.round() as i128, 1i128);
    for _ in 0..64 {
        let a = r.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > bound {
            // largest semiconvergent within the bound
            let k = (bound - q0) / q1;
            if k > 0 {
                let ps = k * p1 + p0;
                let qs = k * q1 + q0;
                let es = (x - ps as f64 / qs as f64).abs();
                let ec = (x - p1 as f64 / q1 as f64).abs();
                if es < ec {
                    best = (ps, qs);
                }
            }
            break;
        }
        best = (p2, q2);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::new(best.0.into(), best.1.into())
}

fn orthonormal(u: &[f64], v: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 {
        return None;
    }
    let e1: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let d: f64 = e1.iter().zip(v).map(|(a, b)| a * b).sum();
    let w: Vec<f64> = v.iter().zip(&e1).map(|(b, a)| b - d * a).collect();
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nw <= 1e-14 * v.iter().map(|x| x * x).sum::<f64>().sqrt() {
        return None;
    }
    Some((e1, w.iter().map(|x| x / nw).collect()))
}

/// Sine of the largest principal angle between span(a1, a2) and span(b1, b2).
pub fn plane_distance(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> Option<f64> {
    let (e1, e2) = orthonormal(a.0, a.1)?;
    let (f1, f2) = orthonormal(b.0, b.1)?;
    let res = |f: &[f64]| -> Vec<f64> {
        let c1: f64 = e1.iter().zip(f).map(|(x, y)| x * y).sum();
        let c2: f64 = e2.iter().zip(f).map(|(x, y)| x * y).sum();
        f.iter().zip(&e1).zip(&e2).map(|((y, x1), x2)| y - c1 * x1 - c2 * x2).collect()
    };
    let r1 = res(&f1);
    let r2 = res(&f2);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let (a11, a12, a22) = (dot(&r1, &r1), dot(&r1, &r2), dot(&r2, &r2));
    let tr = a11 + a22;
    let disc = ((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12).sqrt();
    Some(((tr + disc) / 2.0).max(0.0).sqrt())
}

/// (largest sine, sum of squared sines) of the principal angles.
fn plane_angles(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> Option<(f64, f64)> {
    let (e1, e2) = orthonormal(a.0, a.1)?;
    let (f1, f2) = orthonormal(b.0, b.1)?;
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let (m11, m12, m21, m22) = (dot(&e1, &f1), dot(&e1, &f2), dot(&e2, &f1), dot(&e2, &f2));
    let fro = 2.0 - (m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22);
    Some((plane_distance(a, b)?, fro.max(0.0)))
}

fn q_f64(x: &Q) -> f64 {
    crate::scalar::q_to_f64(x)
}

/// Pivot form (a, b) of span(u, v) for pivots p1 ≠ p2: a_{p1} = 1, a_{p2} = 0, b_{p1} = 0, b_{p2} = 1.
fn pivot_form(u: &[f64], v: &[f64], p1: usize, p2: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let det = u[p1] * v[p2] - u[p2] * v[p1];
    if det == 0.0 {
        return None;
    }
    let a = (0..u.len()).map(|k| (v[p2] * u[k] - u[p2] * v[k]) / det).collect();
    let b = (0..u.len()).map(|k| (u[p1] * v[k] - v[p1] * u[k]) / det).collect();
    Some((a, b))
}

/// Descent state for one pivot pair; `vals` mirrors `rows` in floating point.
struct PivotSearch {
    a: Vec<f64>,
    b: Vec<f64>,
    free: Vec<(usize, usize)>,
    rows: [Vec<Q>; 2],
    vals: [Vec<f64>; 2],
    dist: f64,
}

impl PivotSearch {
    fn new(u: &[f64], v: &[f64], p1: usize, p2: usize) -> Option<Self> {
        let (a, b) = pivot_form(u, v, p1, p2)?;
        let n = u.len();
        let free: Vec<(usize, usize)> = (0..2).flat_map(|r| (0..n).filter(move |&k| k != p1 && k != p2).map(move |k| (r, k))).collect();
        let mut rows = [vec![Q::zero(); n], vec![Q::zero(); n]];
        rows[0][p1] = Q::one();
        rows[1][p2] = Q::one();
        for &(r, k) in &free {
            rows[r][k] = Q::from_integer(num_bigint::BigInt::from((if r == 0 { a[k] } else { b[k] }).round() as i64));
        }
        let vals = [rows[0].iter().map(q_f64).collect(), rows[1].iter().map(q_f64).collect()];
        Some(PivotSearch { a, b, free, rows, vals, dist: f64::INFINITY })
    }

    fn eval(&self, om: &[(usize, usize, f64)], space: &SymplecticSpace, target: (&[f64], &[f64])) -> Option<(f64, f64)> {
        let [ra, rb] = &self.vals;
        let (mut p, mut scale) = (0.0, 0.0);
        for &(i, j, w) in om {
            p += ra[i] * w * rb[j];
            scale += (ra[i] * w * rb[j]).abs();
        }
        if p.abs() <= 1e-9 * scale && space.pair_q(&self.rows[0], &self.rows[1]).is_zero() {
            return None;
        }
        plane_angles(target, (ra, rb))
    }

    fn better(x: (f64, f64), y: (f64, f64)) -> bool {
        x.0 < y.0 || (x.0 == y.0 && x.1 < y.1)
    }

    /// The `k` rationals with denominator ≤ `den` nearest to x.
    fn nearest(x: f64, den: u64, k: usize) -> Vec<(Q, f64)> {
        let mut out: Vec<(f64, i64, i64)> = Vec::new();
        for d in 1..=den as i64 {
            let c = (x * d as f64).round() as i64;
            for num in [c - 1, c, c + 1] {
                let g = num.gcd(&d);
                let (nn, dd) = (num / g, d / g);
                if !out.iter().any(|&(_, a, b)| a == nn && b == dd) {
                    out.push(((x - nn as f64 / dd as f64).abs(), nn, dd));
                }
            }
        }
        out.sort_by(|p, q| p.0.total_cmp(&q.0));
        out.into_iter().take(k).map(|(_, nn, dd)| (Q::new(nn.into(), dd.into()), nn as f64 / dd as f64)).collect()
    }

    fn set(&mut self, slot: (usize, usize), c: &(Q, f64)) {
        self.rows[slot.0][slot.1] = c.0.clone();
        self.vals[slot.0][slot.1] = c.1;
    }

    /// Block descent over pairs of entries with denominators ≤ `den`, starting from the current rows.
    fn refine(&mut self, om: &[(usize, usize, f64)], space: &SymplecticSpace, target: (&[f64], &[f64]), den: u64) {
        let mut cur = self.eval(om, space, target).unwrap_or((f64::INFINITY, f64::INFINITY));
        let cands: Vec<Vec<(Q, f64)>> = self
            .free
            .iter()
            .map(|&(r, k)| Self::nearest(if r == 0 { self.a[k] } else { self.b[k] }, den, 5))
            .collect();
        let m = self.free.len();
        for _ in 0..16 {
            let mut improved = false;
            for i in 0..m {
                for j in i..m {
                    let (si, sj) = (self.free[i], self.free[j]);
                    let keep_i = (self.rows[si.0][si.1].clone(), self.vals[si.0][si.1]);
                    let keep_j = (self.rows[sj.0][sj.1].clone(), self.vals[sj.0][sj.1]);
                    let mut best = None;
                    for (xi, ci) in cands[i].iter().enumerate() {
                        let cj_list = if i == j { &cands[i][xi..=xi] } else { &cands[j][..] };
                        for (xj, cj) in cj_list.iter().enumerate() {
                            self.set(si, ci);
                            if i != j {
                                self.set(sj, cj);
                            }
                            if let Some(v) = self.eval(om, space, target) {
                                if Self::better(v, cur) {
                                    cur = v;
                                    best = Some((xi, xj));
                                }
                            }
                            self.set(si, &keep_i);
                            self.set(sj, &keep_j);
                        }
                    }
                    if let Some((xi, xj)) = best {
                        let ci = cands[i][xi].clone();
                        self.set(si, &ci);
                        if i != j {
                            let cj = cands[j][xj].clone();
                            self.set(sj, &cj);
                        }
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        self.dist = cur.0;
    }
}

/// Rational plane with denominators ≤ `bound` near span(u, v), oriented so that ⟨γ, μ⟩ > 0.
/// Each denominator limit refines the best plane of the previous one, so the distance is
/// nonincreasing in `bound`.
pub fn rational_plane_near(space: &SymplecticSpace, u: &[f64], v: &[f64], bound: u64) -> Result<RationalPlane, HodgeError> {
    let n = space.dim();
    if u.len() != n || v.len() != n {
        return Err(HodgeError::Dimension(n, u.len().min(v.len())));
    }
    let om = space.omega.map(|x| C64::new(q_f64(x), 0.0));
    let uc: Vec<C64> = u.iter().map(|x| C64::new(*x, 0.0)).collect();
    let vc: Vec<C64> = v.iter().map(|x| C64::new(*x, 0.0)).collect();
    let s = om.bilinear(&uc, &vc).re;
    if !(s > 0.0) {
        return Err(HodgeError::NonPositivePlane(format!("{s:e}")));
    }
    orthonormal(u, v).ok_or(HodgeError::DegeneratePlane)?;
    let mut minors = Vec::new();
    for p1 in 0..n {
        for p2 in 0..n {
            if p1 != p2 {
                minors.push(((u[p1] * v[p2] - u[p2] * v[p1]).abs(), p1, p2));
            }
        }
    }
    let top = minors.iter().fold(0.0f64, |m, x| m.max(x.0));
    let mut searches: Vec<PivotSearch> =
        minors.iter().filter(|x| x.0 >= 1e-3 * top).filter_map(|&(_, p1, p2)| PivotSearch::new(u, v, p1, p2)).collect();
    let mut om = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !space.omega[(i, j)].is_zero() {
                om.push((i, j, q_f64(&space.omega[(i, j)])));
            }
        }
    }
    for den in 1..=bound.max(1) {
        for st in searches.iter_mut() {
            st.refine(&om, space, (u, v), den);
        }
    }
    let best = searches.iter().filter(|x| x.dist.is_finite()).min_by(|x, y| x.dist.total_cmp(&y.dist)).ok_or(HodgeError::NoRationalPlane(bound))?;
    let [mut g, mut m] = best.rows.clone();
    let distance = best.dist;
    if space.pair_q(&g, &m).is_negative() {
        std::mem::swap(&mut g, &mut m);
    }
    let p = space.pair_q(&g, &m);
    // scale γ by the denominator of ⟨γ, μ⟩ so that the pairing is a positive integer
    let scale = Q::from_integer(p.denom().clone());
    let g: Vec<Q> = g.iter().map(|x| x * &scale).collect();
    let pairing = space.pair_q(&g, &m);
    if !pairing.is_positive() || !pairing.is_integer() {
        return Err(HodgeError::NoRationalPlane(bound));
    }
    Ok(RationalPlane { gamma: g, mu: m, pairing, distance, bound })
}

/// Lattice vectors (columns) in H³ with their Gram matrix under Q.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerLattice {
    pub basis: Mat<Q>,
    pub gram: Mat<Q>,
}

impl IntegerLattice {
    pub fn new(basis: Mat<Q>, pairing: &Mat<Q>) -> Result<Self, HodgeError> {
        let gram = basis.transpose().mul(pairing).mul(&basis);
        for a in 0..gram.rows {
            for b in 0..gram.cols {
                if !gram[(a, b)].is_integer() || gram[(a, b)] != -gram[(b, a)].clone() {
                    return Err(HodgeError::BadLattice);
                }
            }
        }
        Ok(IntegerLattice { basis, gram })
    }

    pub fn det_gram(&self) -> Q {
        self.gram.det()
    }
}

/// Rows X0, X1, F1, F0 of the integral periods in terms of Π̂.
pub fn quintic_integral_change() -> Mat<Q> {
    Mat::from_rows(vec![
        vec![Q::one(), Q::zero(), Q::zero(), Q::zero()],
        vec![Q::zero(), Q::one(), Q::zero(), Q::zero()],
        vec![q(25, 12), q(-11, 2), q(-5, 1), Q::zero()],
        vec![Q::zero(), q(25, 12), Q::zero(), q(5, 1)],
    ])
}

/// The integral symplectic lattice of the quintic in Π̂ coordinates: columns of B⁻¹.
pub fn quintic_integral_lattice(chart: &SpecialChart) -> Result<IntegerLattice, HodgeError> {
    let binv = quintic_integral_change().inverse().ok_or(HodgeError::BadLattice)?;
    let pairing = crate::special_geometry::real_pairing(&chart.frame, &chart.kappa)?;
    IntegerLattice::new(binv, &pairing)
}

/// Lattice after CHSV parallel transport.
#[derive(Clone, Debug)]
pub struct TransportedLattice {
    pub basis: Mat<C64>,
    pub gram: Mat<Q>,
    pub gram_deviation: f64,
    /// Largest imaginary part of a transported vector (real structure check).
    pub imag_part: f64,
    pub end: C64,
}

/// dv/ds for D^{(t)}v = 0 in Π̂ coordinates, where the Gauss–Manin part is trivial:
/// v' = −B[(t−1)θ ṫ + (t⁻¹−1)θ̄ conj(ṫ)]B⁻¹ v.
fn transport_generator(chart: &SpecialChart, at: C64, dir: C64, phase: C64) -> Result<Mat<C64>, HodgeError> {
    let conn = quintic_frame_connection(chart, at)?;
    let (_, th, _, tb) = conn.split();
    let binv = conn.frame.inverse().ok_or(HodgeError::RankDeficient)?;
    let one = C64::new(1.0, 0.0);
    let m = th[0].scale(&((phase - one) * dir)).add(&tb[0].scale(&((phase.inv() - one) * dir.conj())));
    Ok(conn.frame.mul(&m).mul(&binv).scale(&C64::new(-1.0, 0.0)))
}

/// Transports the lattice along the polygonal path with RK4, `steps` per segment.
pub fn lattice_transport(chart: &SpecialChart, lat: &IntegerLattice, path: &[C64], phase: C64, steps: usize) -> Result<TransportedLattice, HodgeError> {
    if (phase.norm() - 1.0).abs() > 1e-12 {
        return Err(ConnectionError::NotUnitary(phase.norm()).into());
    }
    let mut v = lat.basis.to_c64();
    let steps = steps.max(1);
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let dir = b - a;
        let ds = 1.0 / steps as f64;
        for k in 0..steps {
            let s0 = k as f64 * ds;
            let at = |s: f64| a + dir * s;
            let k1 = transport_generator(chart, at(s0), dir, phase)?.mul(&v);
            let g2 = transport_generator(chart, at(s0 + ds / 2.0), dir, phase)?;
            let k2 = g2.mul(&v.add(&k1.scale(&C64::new(ds / 2.0, 0.0))));
            let k3 = g2.mul(&v.add(&k2.scale(&C64::new(ds / 2.0, 0.0))));
            let k4 = transport_generator(chart, at(s0 + ds), dir, phase)?.mul(&v.add(&k3.scale(&C64::new(ds, 0.0))));
            let inc = k1.add(&k2.scale(&C64::new(2.0, 0.0))).add(&k3.scale(&C64::new(2.0, 0.0))).add(&k4);
            v = v.add(&inc.scale(&C64::new(ds / 6.0, 0.0)));
        }
    }
    let gram_c = v.transpose().mul(&chart.sigma).mul(&v);
    let mut dev: f64 = 0.0;
    for r in 0..gram_c.rows {
        for c in 0..gram_c.cols {
            let x = gram_c[(r, c)];
            dev = dev.max((x.re - x.re.round()).abs()).max(x.im.abs());
        }
    }
    let gram = Mat::from_fn(gram_c.rows, gram_c.cols, |r, c| Q::from_integer(num_bigint::BigInt::from(gram_c[(r, c)].re.round() as i64)));
    if dev > 1e-8 {
        return Err(HodgeError::NonIntegralGram(dev));
    }
    let mut imag: f64 = 0.0;
    for r in 0..v.rows {
        for c in 0..v.cols {
            imag = imag.max(v[(r, c)].im.abs());
        }
    }
    Ok(TransportedLattice { basis: v, gram, gram_deviation: dev, imag_part: imag, end: *path.last().unwrap_or(&C64::new(0.0, 0.0)) })
}

/// Normalised period matrix Z of (ℝ^{2n}/Λ, J, ω) and the symplectic basis used.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    pub z: Mat<C64>,
    /// a_1..a_n, b_1..b_n with ω(a_i, b_j) = δ_ij, as ambient vectors.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub asymmetry: f64,
    pub im_min_eigenvalue: f64,
}

/// Integer symplectic basis of a unimodular antisymmetric Gram matrix: columns of W with WᵀGW = [[0, I], [−I, 0]].
pub fn symplectic_basis_z(gram: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, HodgeError> {
    let m = gram.len();
    let pair = |x: &[i64], y: &[i64]| -> i64 {
        let mut s = 0i64;
        for i in 0..m {
            for j in 0..m {
                s += x[i] * gram[i][j] * y[j];
            }
        }
        s
    };
    let mut vecs: Vec<Vec<i64>> = (0..m).map(|k| (0..m).map(|i| i64::from(i == k)).collect()).collect();
    let mut a_list = Vec::new();
    let mut b_list = Vec::new();
    while !vecs.is_empty() {
        let a = vecs.remove(0);
        // Euclid on the values ⟨a, v_k⟩ until one nonzero remains
        loop {
            let nz: Vec<usize> = (0..vecs.len()).filter(|&k| pair(&a, &vecs[k]) != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let (mut i0, mut i1) = (nz[0], nz[1]);
            if pair(&a, &vecs[i0]).abs() > pair(&a, &vecs[i1]).abs() {
                std::mem::swap(&mut i0, &mut i1);
            }
            let qv = Integer::div_floor(&pair(&a, &vecs[i1]), &pair(&a, &vecs[i0]));
            let src = vecs[i0].clone();
            for (x, y) in vecs[i1].iter_mut().zip(&src) {
                *x -= qv * y;
            }
        }
        let Some(ib) = (0..vecs.len()).find(|&k| pair(&a, &vecs[k]) != 0) else {
            return Err(HodgeError::NonPositivePolarization);
        };
        let mut b = vecs.remove(ib);
        let ab = pair(&a, &b);
        if ab.abs() != 1 {
            return Err(HodgeError::BadLattice);
        }
        if ab < 0 {
            b.iter_mut().for_each(|x| *x = -*x);
        }
        // r ↦ r − ⟨r,b⟩a + ⟨r,a⟩b
        for r in vecs.iter_mut() {
            let rb = pair(r, &b);
            let ra = pair(r, &a);
            for i in 0..m {
                r[i] = r[i] - rb * a[i] + ra * b[i];
            }
        }
        a_list.push(a);
        b_list.push(b);
    }
    Ok(a_list.into_iter().chain(b_list).collect())
}

/// Siegel point of the lattice spanned by the columns of `lattice` (ambient ℝ^{2n}).
pub fn abelian_period_matrix(lattice: &Mat<C64>, j: &Mat<C64>, omega: &Mat<C64>) -> Result<SiegelPoint, HodgeError> {
    let dim = lattice.rows;
    if lattice.cols != dim || j.rows != dim || omega.rows != dim || dim % 2 != 0 {
        return Err(HodgeError::Dimension(dim, lattice.cols));
    }
    let n = dim / 2;
    let re = |m: &Mat<C64>| DMatrix::<f64>::from_fn(m.rows, m.cols, |r, c| m[(r, c)].re);
    let l = re(lattice);
    let jm = re(j);
    let om = re(omega);
    // compatibility and positivity of g(u, v) = ω(u, Jv)
    let g = om.clone() * &jm;
    let gs = (&g + g.transpose()) * 0.5;
    let scale = gs.amax().max(1e-300);
    if (&g - g.transpose()).amax() > 1e-8 * scale || (jm.transpose() * &om * &jm - &om).amax() > 1e-8 * om.amax() {
        return Err(HodgeError::NonPositivePolarization);
    }
    if gs.clone().symmetric_eigen().eigenvalues.min() <= 1e-12 * scale {
        return Err(HodgeError::NonPositivePolarization);
    }
    let gram = l.transpose() * &om * &l;
    let mut gi = vec![vec![0i64; dim]; dim];
    for r in 0..dim {
        for c in 0..dim {
            let x = gram[(r, c)];
            if (x - x.round()).abs() > 1e-8 {
                return Err(HodgeError::NonIntegralGram((x - x.round()).abs()));
            }
            gi[r][c] = x.round() as i64;
        }
    }
    let w = symplectic_basis_z(&gi)?;
    let vec_of = |coef: &[i64]| -> Vec<f64> { (0..dim).map(|r| (0..dim).map(|c| l[(r, c)] * coef[c] as f64).sum()).collect() };
    let a: Vec<Vec<f64>> = w[..n].iter().map(|c| vec_of(c)).collect();
    let b: Vec<Vec<f64>> = w[n..].iter().map(|c| vec_of(c)).collect();
    // b_j = Σ_k X_kj a_k + Y_kj J a_k
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n {
        let av = DMatrix::from_column_slice(dim, 1, &a[k]);
        let ja = &jm * &av;
        for r in 0..dim {
            m[(r, k)] = a[k][r];
            m[(r, n + k)] = ja[(r, 0)];
        }
    }
    let rhs = DMatrix::<f64>::from_fn(dim, n, |r, c| b[c][r]);
    let sol = m.lu().solve(&rhs).ok_or(HodgeError::NonPositivePolarization)?;
    let z = Mat::from_fn(n, n, |k, jj| C64::new(sol[(k, jj)], sol[(n + k, jj)]));
    let mut asym: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            asym = asym.max((z[(r, c)] - z[(c, r)]).norm());
        }
    }
    let imz = DMatrix::<f64>::from_fn(n, n, |r, c| 0.5 * (z[(r, c)].im + z[(c, r)].im));
    let min_eig = imz.symmetric_eigen().eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(HodgeError::NonPositivePolarization);
    }
    Ok(SiegelPoint { z, a, b, asymmetry: asym, im_min_eigenvalue: min_eig })
}

/// Polarising complex structure of a Hodge frame: −J_Weil, for which ω(u, Ju) > 0.
pub fn polarizing_j(frame: &HodgeFrame<C64>) -> Mat<C64> {
    frame.j.scale(&C64::new(-1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard_fuchs::{frobenius_basis, PFOperator};
    use crate::scalar::qi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chart() -> SpecialChart {
        let f = frobenius_basis(&PFOperator::quintic(), 40, None).unwrap();
        SpecialChart::new(f, qi(5), 1.6e-4).unwrap()
    }

    fn t_base(c: &SpecialChart) -> C64 {
        c.t_of_z(C64::new(1e-4, 0.0))
    }

    #[test]
    fn quintic_frame_invariants_and_signature() {
        let c = chart();
        let f = frame_from_periods(&c, t_base(&c)).unwrap();
        assert!(f.invariants().max() < 1e-12, "{:?}", f.invariants());
        assert_eq!(f.signature(), (2, 2, 0));
        // eigenvalues of J: ±i each twice, read off the Hodge basis
        let d = f.basis_inv.mul(&f.j).mul(&f.basis);
        for (k, lam) in [(0, -1.0), (1, 1.0), (2, -1.0), (3, 1.0)] {
            assert!((d[(k, k)] - C64::new(0.0, lam)).norm() < 1e-12);
        }
    }

    #[test]
    fn torus_frame_exact() {
        let g = TorusGeometry::new();
        let f = torus_frame(&g).unwrap();
        assert_eq!(f.invariants().max(), 0.0);
        let (p, n, z) = f.signature();
        assert_eq!(p + n + z, 20);
        assert_eq!(z, 0);
    }

    #[test]
    fn dj_torus_ratio_and_abelian_direction() {
        let g = TorusGeometry::new();
        let d = torus_dj(&g);
        assert_eq!(d.wit12, d.wit15);
        assert_eq!(d.ratio, Some(Gq::int(0, 2)));
        let e = crate::kuranishi::torus_index(1, 1);
        for l in 0..N {
            assert!(TorusDj::get(&d.measured, e, e, l).is_zero());
            assert!(TorusDj::get(&d.wit12, e, e, l).is_zero());
        }
    }

    #[test]
    fn dj_quintic_matches_corrected_formula() {
        let c = chart();
        let conv = dj_convergence(&c, t_base(&c), 1e-3).unwrap();
        let r = &conv.reports[0];
        assert!(r.corrected_residual < 1e-4, "{r:?}");
        assert!((r.residual12 - r.residual15).abs() < 1e-8);
        assert!((r.ratio - C64::new(0.0, 2.0)).norm() < 1e-4);
        assert!((1.8..=2.2).contains(&conv.slope), "slope {}", conv.slope);
    }

    #[test]
    fn extended_point_unimodular() {
        let sp = SymplecticSpace::standard(3);
        let mut g = vec![qi(0); 6];
        let mut m = vec![qi(0); 6];
        g[0] = qi(1);
        g[1] = qi(2);
        m[3] = qi(1);
        m[5] = qi(7);
        let p = extended_point(&sp, &g, &m).unwrap();
        assert_eq!(sp.pair_q(&g, &m), qi(1));
        assert_eq!(p.hermitian_norm(&sp), Gq::int(2, 0));
        assert!(p.isotropy(&sp).is_zero());
        assert_eq!(plane_of_point(&p.omega), (g.clone(), m.clone()));
        assert_eq!(p.completion.len(), 2);
        for (i, (gi, mi)) in p.completion.iter().enumerate() {
            assert_eq!(sp.pair_q(gi, mi), qi(-1));
            for x in [&g, &m] {
                assert!(sp.pair_q(gi, x).is_zero() && sp.pair_q(mi, x).is_zero());
            }
            for (gj, mj) in &p.completion[i + 1..] {
                for (x, y) in [(gi, gj), (gi, mj), (mi, gj), (mi, mj)] {
                    assert!(sp.pair_q(x, y).is_zero());
                }
            }
        }
        let f = p.hodge_frame(&sp).unwrap();
        assert_eq!(f.signature(), (2, 4, 0));
        assert!(matches!(extended_point(&sp, &m, &g), Err(HodgeError::NonPositivePlane(_))));
        assert!(matches!(extended_point(&sp, &g, &g), Err(HodgeError::DegeneratePlane)));
    }

    #[test]
    fn contact_form_standard_pair() {
        let sp = SymplecticSpace::standard(2);
        // Ω = μ0 + iγ0 in coordinates (γ0, γ1, μ0, μ1)
        let z = vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let e1 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let f1 = vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let v = contact_form_eval(&sp, &z, 2, &e1, &f1).unwrap();
        assert!((v.lifted - 1.0).norm() < 1e-15);
        let w = contact_form_eval(&sp, &z, 2, &f1, &e1).unwrap();
        assert!((w.lifted + 1.0).norm() < 1e-15);
        let (_, agree) = contact_chart_agreement(&sp, &z, &e1, &f1).unwrap();
        assert!(agree <= 1e-12);
        assert!(matches!(contact_form_eval(&sp, &z, 1, &e1, &f1), Err(HodgeError::ChartZero(1))));
        assert!(matches!(contact_form_eval(&sp, &z, 2, &z, &f1), Err(HodgeError::NotTangent(_))));
    }

    #[test]
    fn contact_form_generic_point_two_charts() {
        let sp = SymplecticSpace::standard(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = vec![qi(0); 6];
        let mut m = vec![qi(0); 6];
        for k in 0..6 {
            g[k] = qi(rng.gen_range(-3..=3));
            m[k] = qi(rng.gen_range(-3..=3));
        }
        g[0] = qi(1);
        m[3] = qi(2);
        if sp.pair_q(&g, &m) <= qi(0) {
            std::mem::swap(&mut g, &mut m);
        }
        let p = extended_point(&sp, &g, &m).unwrap();
        let z: Vec<C64> = p.omega.iter().map(|x| x.to_c64()).collect();
        let (ga, ma) = &p.completion[0];
        let (gb, _) = &p.completion[1];
        let u: Vec<C64> = ga.iter().zip(gb).map(|(a, b)| C64::new(crate::scalar::q_to_f64(a), crate::scalar::q_to_f64(b))).collect();
        let v: Vec<C64> = ma.iter().map(|a| C64::new(crate::scalar::q_to_f64(a), 0.0)).collect();
        let (vals, agree) = contact_chart_agreement(&sp, &z, &u, &v).unwrap();
        assert!(vals.len() >= 2);
        assert!(agree <= 1e-12, "{agree}");
        for c in &vals {
            assert!((c.lifted - c.pairing).norm() <= 1e-12);
        }
    }

    #[test]
    fn best_rational_basics() {
        assert_eq!(best_rational(std::f64::consts::PI, 7), q(22, 7));
        assert_eq!(best_rational(std::f64::consts::PI, 113), q(355, 113));
        assert_eq!(best_rational(0.5, 10), q(1, 2));
        assert_eq!(best_rational(-0.25, 10), q(-1, 4));
    }

    #[test]
    fn rational_plane_already_rational() {
        let sp = SymplecticSpace::standard(2);
        let u = [1.0, 0.5, 0.0, 0.25];
        let v = [0.0, 0.0, 1.0, -0.75];
        let r = rational_plane_near(&sp, &u, &v, 8).unwrap();
        assert!(r.distance <= 1e-15);
        assert!(r.pairing.is_integer() && r.pairing.is_positive());
    }

    #[test]
    fn rational_plane_pi_example_and_monotone() {
        let sp = SymplecticSpace::standard(2);
        let u = [1.0, 0.0, 0.0, std::f64::consts::PI / 10.0];
        let v = [0.0, 0.0, 1.0, 0.0];
        let mut last = f64::INFINITY;
        for b in [1, 2, 5, 10, 50, 100] {
            let r = rational_plane_near(&sp, &u, &v, b).unwrap();
            assert!(r.distance <= last);
            last = r.distance;
        }
        assert!(last <= 1e-2);
    }

    /// Exhaustive search over pivot-form planes with denominators ≤ b near the target.
    fn exhaustive_oracle(_sp: &SymplecticSpace, u: &[f64], v: &[f64], b: i64) -> f64 {
        let n = 4;
        let mut best = f64::INFINITY;
        for p1 in 0..n {
            for p2 in 0..n {
                if p1 == p2 {
                    continue;
                }
                // pivot form of the target for these pivots, when it exists
                let det = u[p1] * v[p2] - u[p2] * v[p1];
                if det.abs() < 1e-12 {
                    continue;
                }
                let a: Vec<f64> = (0..n).map(|k| (v[p2] * u[k] - u[p2] * v[k]) / det).collect();
                let bb: Vec<f64> = (0..n).map(|k| (u[p1] * v[k] - v[p1] * u[k]) / det).collect();
                let free: Vec<usize> = (0..n).filter(|&k| k != p1 && k != p2).collect();
                let cands = |x: f64| -> Vec<f64> {
                    let mut out = Vec::new();
                    for d in 1..=b {
                        let c = (x * d as f64).round() as i64;
                        for nn in c - 1..=c + 1 {
                            out.push(nn as f64 / d as f64);
                        }
                    }
                    out.sort_by(f64::total_cmp);
                    out.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
                    out
                };
                let ca: Vec<Vec<f64>> = free.iter().map(|&k| cands(a[k])).collect();
                let cb: Vec<Vec<f64>> = free.iter().map(|&k| cands(bb[k])).collect();
                for x0 in &ca[0] {
                    for x1 in &ca[1] {
                        for y0 in &cb[0] {
                            for y1 in &cb[1] {
                                let mut ra = vec![0.0; n];
                                let mut rb = vec![0.0; n];
                                ra[p1] = 1.0;
                                rb[p2] = 1.0;
                                ra[free[0]] = *x0;
                                ra[free[1]] = *x1;
                                rb[free[0]] = *y0;
                                rb[free[1]] = *y1;
                                if (ra[0] * rb[2] + ra[1] * rb[3] - ra[2] * rb[0] - ra[3] * rb[1]).abs() < 1e-12 {
                                    continue;
                                }
                                if let Some(d) = plane_distance((u, v), (&ra, &rb)) {
                                    best = best.min(d);
                                }
                            }
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn rational_plane_against_exhaustive_oracle() {
        let sp = SymplecticSpace::standard(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
            if s < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let ours = rational_plane_near(&sp, &u, &v, 6).unwrap();
            let oracle = exhaustive_oracle(&sp, &u, &v, 6);
            assert!(ours.distance <= 2.0 * oracle + 1e-12, "ours {} oracle {}", ours.distance, oracle);
        }
    }

    #[test]
    fn rational_plane_monotone_on_seeded_planes() {
        let sp = SymplecticSpace::standard(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let u: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s = u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
            if s < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let mut last = f64::INFINITY;
            for b in [2, 4, 8, 16, 32] {
                if let Ok(r) = rational_plane_near(&sp, &u, &v, b) {
                    assert!(r.distance <= last);
                    assert!(sp.pair_q(&r.gamma, &r.mu).is_positive());
                    last = r.distance;
                }
            }
        }
    }

    #[test]
    fn square_lattice_gives_i() {
        let l = Mat::<C64>::identity(2);
        let j = Mat::from_rows(vec![vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]);
        let om = Mat::from_rows(vec![vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]]);
        let s = abelian_period_matrix(&l, &j, &om).unwrap();
        assert!((s.z[(0, 0)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        let jneg = j.scale(&C64::new(-1.0, 0.0));
        assert!(matches!(abelian_period_matrix(&l, &jneg, &om), Err(HodgeError::NonPositivePolarization)));
    }

    #[test]
    fn quintic_lattice_and_siegel_point() {
        let c = chart();
        let lat = quintic_integral_lattice(&c).unwrap();
        assert_eq!(lat.det_gram().abs(), qi(1));
        let t0 = t_base(&c);
        let path = [t0, t0 + C64::new(0.05, 0.0), t0 + C64::new(0.05, 0.05)];
        let moved = lattice_transport(&c, &lat, &path, C64::new(0.0, 1.0), 20).unwrap();
        assert_eq!(moved.gram, lat.gram);
        assert!(moved.imag_part < 1e-8);
        let same = lattice_transport(&c, &lat, &[t0, t0], C64::new(0.0, 1.0), 4).unwrap();
        assert!(same.basis.sub(&lat.basis.to_c64()).norm() == 0.0);
        let f = frame_from_periods(&c, moved.end).unwrap();
        let s = abelian_period_matrix(&moved.basis, &polarizing_j(&f), &c.sigma).unwrap();
        assert!(s.asymmetry < 1e-8);
        assert!(s.im_min_eigenvalue > 0.0);
    }
}
