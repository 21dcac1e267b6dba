//! Gauss–Manin matrices, Higgs fields, the Frobenius product and the CHSV family
//! D = ∇ + tθ + t⁻¹θ̄ with numerical flatness checks.

use crate::linalg::Mat;
use crate::picard_fuchs::{PFOperator, PeriodFrame};
use crate::scalar::{ComplexScalar, Gq, Scalar, C64, Q};
use crate::series::{LogSeries, SeriesError, TruncSeries};
use crate::special_geometry::{GeometryError, SpecialChart, SpecialGeometrySample, Tensor3};
use crate::torus::{frame_grading, TorusGeometry, N, VARS};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("pairing is not invariant under the Gauss-Manin matrix: residual {0}")]
    PairingNotInvariant(String),
    #[error("pairing h is singular")]
    SingularPairing,
    #[error("CHSV parameter t = 0")]
    ZeroT,
    #[error("|t| = {0} off the unit circle; pass allow_general_t to unlock")]
    NotUnitary(f64),
    #[error("step {0} outside [1e-5, 1e-2]")]
    BadStep(f64),
    #[error("operator has no frame data")]
    NoOperator,
}

/// Companion matrix of θ acting on (f, θf, θ²f, θ³f) for a Picard–Fuchs operator,
/// as truncated series in z.
#[derive(Clone, Debug)]
pub struct GaussManin {
    /// A[r][c]: θ(basis_c) = Σ_r A[r][c] basis_r … stored row-major as series.
    pub matrix: Vec<Vec<TruncSeries<Q>>>,
    /// Pairing of the cyclic basis, Q(θ^aΠ, θ^bΠ) as series.
    pub pairing: Vec<Vec<TruncSeries<Q>>>,
}

/// Gauss–Manin matrix in the cyclic basis Π, θΠ, θ²Π, θ³Π:
/// θ(Π_basis) = Π_basis·A with last column −p_k/p_4.
pub fn gauss_manin_matrix(op: &PFOperator, frame: &PeriodFrame) -> Result<GaussManin, ConnectionError> {
    let order = frame.trunc_order;
    let n = op.p.len() - 1;
    let lead = op.p_series::<Q>(n, order).reciprocal()?;
    let zero = TruncSeries::<Q>::zero(order);
    let one = TruncSeries::<Q>::one(order);
    let mut a = vec![vec![zero.clone(); n]; n];
    for c in 0..n - 1 {
        a[c + 1][c] = one.clone();
    }
    for r in 0..n {
        a[r][n - 1] = op.p_series::<Q>(r, order).mul(&lead)?.neg();
    }
    // Q(θ^aΠ, θ^bΠ) from the Frobenius solutions
    let mut pairing = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        let ui = frame.theta_vector(i);
        for j in 0..n {
            let vj = frame.theta_vector(j);
            let s = frame.q_series(&ui, &vj)?;
            if s.max_log_power() > 0 && !s.blocks()[1..].iter().all(|b| b.is_zero()) {
                return Err(ConnectionError::PairingNotInvariant(format!("log terms in Q(theta^{i}, theta^{j})")));
            }
            pairing[i][j] = s.block(0);
        }
    }
    Ok(GaussManin { matrix: a, pairing })
}

impl GaussManin {
    /// θP − (AᵀP + PA) as series; zero iff the pairing is flat.
    pub fn invariance_residual(&self) -> Result<Vec<Vec<TruncSeries<Q>>>, ConnectionError> {
        let n = self.matrix.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut r = self.pairing[i][j].theta();
                for k in 0..n {
                    r = r.sub(&self.matrix[k][i].mul(&self.pairing[k][j])?)?;
                    r = r.sub(&self.pairing[i][k].mul(&self.matrix[k][j])?)?;
                }
                row.push(r);
            }
            out.push(row);
        }
        Ok(out)
    }

    pub fn is_flat(&self) -> Result<bool, ConnectionError> {
        Ok(self.invariance_residual()?.iter().flatten().all(|s| s.is_zero()))
    }
}

/// Evaluates θ^k of every solution, used to cross-check the companion form.
pub fn theta_jets(frame: &PeriodFrame, z: C64, k: usize) -> Vec<Vec<C64>> {
    let lz = z.ln();
    frame
        .float_solutions()
        .iter()
        .map(|s| {
            let mut v = Vec::with_capacity(k + 1);
            let mut cur: LogSeries<C64> = s.clone();
            for _ in 0..=k {
                v.push(cur.eval_c64(z, lz));
                cur = cur.theta();
            }
            v
        })
        .collect()
}

/// Metric connection, Higgs field and pairing on the tangent bundle at one point.
#[derive(Clone, Debug)]
pub struct ConnectionSample<S> {
    /// nabla[k] = Γ_k = G⁻¹∂_kG (Chern connection of G, holomorphic directions).
    pub nabla: Vec<Mat<S>>,
    /// theta[i][(k, j)] = C_ij^k.
    pub theta: Vec<Mat<S>>,
    pub theta_bar: Vec<Mat<S>>,
    pub t: S,
    pub h_pairing: Mat<S>,
    pub h_inverse: Mat<S>,
}

/// h_ij = G_ij̄ e^{−K}/λ-free pairing used to raise the Yukawa index.
pub fn h_pairing<S: ComplexScalar>(s: &SpecialGeometrySample<S>) -> Mat<S> {
    s.middle_metric()
}

/// θ_i(φ_j) = Σ_k C_ij^k φ̄_k with C_ij^k = Σ_m C_ijm h^{mk}.
pub fn higgs_field<S: ComplexScalar>(s: &SpecialGeometrySample<S>, h: &Mat<S>) -> Result<(Vec<Mat<S>>, Mat<S>), ConnectionError> {
    let n = s.dim();
    let hinv = h.inverse().ok_or(ConnectionError::SingularPairing)?;
    let theta = (0..n)
        .map(|i| {
            Mat::from_fn(n, n, |k, j| {
                let mut acc = S::zero();
                for m in 0..n {
                    let w = &hinv[(k, m)];
                    if !w.is_zero() {
                        acc = acc.plus(&s.c.get(i, j, m).times(w));
                    }
                }
                acc
            })
        })
        .collect();
    Ok((theta, hinv))
}

/// The Higgs map on the graded bundle H^{3,0} ⊕ H^{2,1} ⊕ H^{1,2} ⊕ H^{0,3}, basis
/// [Ω, φ_1..φ_n, ω_1..ω_n, Ω̄]: θ_iΩ = φ_i, θ_iφ_j = Σ_k C_ij^k ω_k, θ_iω_k = h_ik Ω̄.
pub fn graded_higgs_field<S: ComplexScalar>(theta: &[Mat<S>], h: &Mat<S>) -> Vec<Mat<S>> {
    let n = theta.len();
    let dim = 2 * n + 2;
    (0..n)
        .map(|i| {
            let mut m = Mat::zeros(dim, dim);
            m[(1 + i, 0)] = S::one();
            for j in 0..n {
                for k in 0..n {
                    m[(1 + n + k, 1 + j)] = theta[i][(k, j)].clone();
                }
                m[(dim - 1, 1 + n + j)] = h[(i, j)].clone();
            }
            m
        })
        .collect()
}

/// Largest entry of θ_i∘θ_j∘θ_k∘θ_l, which vanishes on a four-step grading.
pub fn higgs_nilpotence<S: Scalar>(graded: &[Mat<S>]) -> f64 {
    let mut m: f64 = 0.0;
    for a in graded {
        for b in graded {
            let ab = a.mul(b);
            for c in graded {
                let abc = ab.mul(c);
                for d in graded {
                    let x = abc.mul(d);
                    for r in 0..x.rows {
                        for k in 0..x.cols {
                            m = m.max(x[(r, k)].magnitude());
                        }
                    }
                }
            }
        }
    }
    m
}

/// Largest entry of the commutators [θ_i, θ_j].
pub fn higgs_commutator<S: Scalar>(theta: &[Mat<S>]) -> f64 {
    let mut m: f64 = 0.0;
    for a in theta {
        for b in theta {
            let c = a.commutator(b);
            for r in 0..c.rows {
                for k in 0..c.cols {
                    m = m.max(c[(r, k)].magnitude());
                }
            }
        }
    }
    m
}

/// Structure constants of φ_i × φ_j = Σ F_ij^k φ_k with F = √−1·C, and checks.
#[derive(Clone, Debug)]
pub struct FrobeniusReport<S> {
    pub f_lower: Tensor3<S>,
    pub f_upper: Vec<Mat<S>>,
    pub commutativity: f64,
    pub associativity: f64,
    pub ratio_to_yukawa: Option<S>,
}

pub fn frobenius_product<S: ComplexScalar>(c: &Tensor3<S>, hinv: &Mat<S>) -> FrobeniusReport<S> {
    let n = c.n;
    let i = S::imag_unit();
    let f_lower = Tensor3::from_fn(n, |a, b, k| c.get(a, b, k).times(&i));
    // F_ij^k, with the index raised by h⁻¹
    let f_upper: Vec<Mat<S>> = (0..n)
        .map(|a| {
            Mat::from_fn(n, n, |b, k| {
                let mut acc = S::zero();
                for m in 0..n {
                    acc = acc.plus(&f_lower.get(a, b, m).times(&hinv[(k, m)]));
                }
                acc
            })
        })
        .collect();
    let mut commutativity: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for k in 0..n {
                commutativity = commutativity.max(f_upper[a][(b, k)].minus(&f_upper[b][(a, k)]).magnitude());
            }
        }
    }
    // (φ_a × φ_b) × φ_c − φ_a × (φ_b × φ_c)
    let mut associativity: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for l in 0..n {
                    let mut lhs = S::zero();
                    let mut rhs = S::zero();
                    for k in 0..n {
                        lhs = lhs.plus(&f_upper[a][(b, k)].times(&f_upper[k][(cc, l)]));
                        rhs = rhs.plus(&f_upper[b][(cc, k)].times(&f_upper[a][(k, l)]));
                    }
                    associativity = associativity.max(lhs.minus(&rhs).magnitude());
                }
            }
        }
    }
    let mut ratio = None;
    let mut consistent = true;
    for (x, y) in f_lower.data.iter().zip(&c.data) {
        if y.is_zero() {
            consistent &= x.is_zero();
            continue;
        }
        let r = x.div(y).expect("nonzero");
        match &ratio {
            None => ratio = Some(r),
            Some(r0) => consistent &= r0.minus(&r).magnitude() <= 1e-12 * r0.magnitude(),
        }
    }
    FrobeniusReport { f_lower, f_upper, commutativity, associativity, ratio_to_yukawa: if consistent { ratio } else { None } }
}

/// D_i = ∇_i + tθ_i, D_j̄ = ∇_j̄ + t⁻¹θ̄_j on the tangent bundle.
pub fn chsv_connection<S: ComplexScalar>(s: &SpecialGeometrySample<S>, t: &S, allow_general_t: bool) -> Result<ConnectionSample<S>, ConnectionError> {
    if t.is_zero() {
        return Err(ConnectionError::ZeroT);
    }
    let modulus = t.to_c64().norm();
    if !allow_general_t && (modulus - 1.0).abs() > 1e-12 {
        return Err(ConnectionError::NotUnitary(modulus));
    }
    let n = s.dim();
    let h = h_pairing(s);
    let (theta, hinv) = higgs_field(s, &h)?;
    let nabla = (0..n).map(|k| s.ginv.mul(&s.dg[k])).collect();
    let theta_bar = theta.iter().map(|m| m.map(|x| x.conjugate())).collect();
    Ok(ConnectionSample { nabla, theta, theta_bar, t: t.clone(), h_pairing: h, h_inverse: hinv })
}

/// Gauss–Manin connection of the Hodge-adapted frame B = [Π, DΠ, conj DΠ, conj Π].
#[derive(Clone, Debug)]
pub struct FrameConnection<S> {
    pub frame: Mat<S>,
    /// a_hol[k] = B⁻¹∂_kB, a_anti[k] = B⁻¹∂_k̄B.
    pub a_hol: Vec<Mat<S>>,
    pub a_anti: Vec<Mat<S>>,
    /// Hodge degree p of each frame column.
    pub grading: Vec<i32>,
}

impl<S: Scalar> FrameConnection<S> {
    /// Part of `m` shifting the Hodge degree by `shift`.
    pub fn graded(&self, m: &Mat<S>, shift: i32) -> Mat<S> {
        Mat::from_fn(m.rows, m.cols, |r, c| if self.grading[r] - self.grading[c] == shift { m[(r, c)].clone() } else { S::zero() })
    }

    /// (∇_k, θ_k) from the holomorphic part and (∇_k̄, θ̄_k) from the antiholomorphic part.
    pub fn split(&self) -> (Vec<Mat<S>>, Vec<Mat<S>>, Vec<Mat<S>>, Vec<Mat<S>>) {
        let nh = self.a_hol.iter().map(|m| self.graded(m, 0)).collect();
        let th = self.a_hol.iter().map(|m| self.graded(m, -1)).collect();
        let na = self.a_anti.iter().map(|m| self.graded(m, 0)).collect();
        let tb = self.a_anti.iter().map(|m| self.graded(m, 1)).collect();
        (nh, th, na, tb)
    }

    /// Largest entry outside the allowed degree shifts ({0,−1} holomorphic, {0,+1} antiholomorphic).
    pub fn transversality_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in &self.a_hol {
            for r in 0..a.rows {
                for c in 0..a.cols {
                    let s = self.grading[r] - self.grading[c];
                    if s != 0 && s != -1 {
                        m = m.max(a[(r, c)].magnitude());
                    }
                }
            }
        }
        for a in &self.a_anti {
            for r in 0..a.rows {
                for c in 0..a.cols {
                    let s = self.grading[r] - self.grading[c];
                    if s != 0 && s != 1 {
                        m = m.max(a[(r, c)].magnitude());
                    }
                }
            }
        }
        m
    }

    /// A^{(t)}_k = ∇_k + tθ_k and A^{(t)}_k̄ = ∇_k̄ + t⁻¹θ̄_k.
    pub fn chsv(&self, t: &S) -> Result<(Vec<Mat<S>>, Vec<Mat<S>>), ConnectionError> {
        let tinv = t.recip().ok_or(ConnectionError::ZeroT)?;
        let (nh, th, na, tb) = self.split();
        let hol = nh.iter().zip(&th).map(|(n, x)| n.add(&x.scale(t))).collect();
        let anti = na.iter().zip(&tb).map(|(n, x)| n.add(&x.scale(&tinv))).collect();
        Ok((hol, anti))
    }
}

/// Frame connection of the one-modulus special chart at flat coordinate t0.
pub fn quintic_frame_connection(chart: &SpecialChart, t0: C64) -> Result<FrameConnection<C64>, ConnectionError> {
    let p = chart.point_t(t0)?;
    let ks = chart.k_series(&p, true, 4)?;
    let kt = ks.deriv(1, 0);
    let ktt = ks.deriv(2, 0);
    let g = ks.deriv(1, 1).re;
    let pi = p.d_eta(0);
    let p1 = p.d_eta(1);
    let p2 = p.d_eta(2);
    let n = pi.len();
    let dpi: Vec<C64> = (0..n).map(|a| p1[a] + kt * pi[a]).collect();
    let ddpi: Vec<C64> = (0..n).map(|a| p2[a] + ktt * pi[a] + kt * p1[a]).collect();
    let cj = |v: &[C64]| -> Vec<C64> { v.iter().map(|x| x.conj()).collect() };
    let zero = vec![C64::new(0.0, 0.0); n];
    let b = Mat::from_cols(&[pi.clone(), dpi.clone(), cj(&dpi), cj(&pi)]);
    let dt = Mat::from_cols(&[p1.clone(), ddpi.clone(), cj(&pi).iter().map(|x| x * g).collect(), zero.clone()]);
    let dtb = Mat::from_cols(&[zero, pi.iter().map(|x| x * g).collect(), cj(&ddpi), cj(&p1)]);
    let binv = b.inverse().ok_or(GeometryError::SingularMetric)?;
    Ok(FrameConnection { a_hol: vec![binv.mul(&dt)], a_anti: vec![binv.mul(&dtb)], frame: b, grading: vec![3, 2, 1, 0] })
}

/// Exact frame connection of the torus fixture at τ = 0, with first derivatives.
pub fn torus_frame_connection(geom: &TorusGeometry) -> (FrameConnection<Gq>, Vec<Vec<Mat<Gq>>>) {
    let (b0, _, _) = geom.frame_jets();
    let (a, da) = geom.connection_jets();
    let conn = FrameConnection { frame: b0, a_hol: a[..N].to_vec(), a_anti: a[N..].to_vec(), grading: frame_grading() };
    (conn, da)
}

/// Curvature blocks of the t-deformed torus connection at τ = 0, split by powers of t.
/// Returns the largest entry (as exact rationals, checked zero) of [D,D], [D,D̄], [D̄,D̄]
/// for every power of t separately.
pub fn torus_chsv_curvature(geom: &TorusGeometry) -> TorusFlatness {
    let (conn, da) = torus_frame_connection(geom);
    let gr = &conn.grading;
    let part = |m: &Mat<Gq>, shift: i32| -> Mat<Gq> { Mat::from_fn(m.rows, m.cols, |r, c| if gr[r] - gr[c] == shift { m[(r, c)].clone() } else { Gq::zero() }) };
    // A = Σ_p t^p A_p with p ∈ {−1, 0, 1}: holomorphic θ carries t¹, antiholomorphic θ̄ carries t⁻¹.
    let weight = |dir: usize, shift: i32| -> i32 {
        match (dir < N, shift) {
            (_, 0) => 0,
            (true, -1) => 1,
            (false, 1) => -1,
            _ => 99,
        }
    };
    let a: Vec<Mat<Gq>> = conn.a_hol.iter().chain(conn.a_anti.iter()).cloned().collect();
    let mut blocks: Vec<(String, i32, bool)> = Vec::new();
    let mut all_zero = true;
    let mut nonzero_entries = 0usize;
    for (name, ka, kb) in [("[D,D]", 0usize..N, 0usize..N), ("[D,Dbar]", 0..N, N..VARS), ("[Dbar,Dbar]", N..VARS, N..VARS)] {
        for power in -2..=2 {
            let mut ok = true;
            for k in ka.clone() {
                for l in kb.clone() {
                    // F_kl = ∂_kA_l − ∂_lA_k + [A_k, A_l], coefficient of t^power
                    let mut f = Mat::<Gq>::zeros(a[0].rows, a[0].cols);
                    for shift in -1..=1 {
                        if weight(l, shift) == power {
                            f = f.add(&part(&da[k][l], shift));
                        }
                        if weight(k, shift) == power {
                            f = f.sub(&part(&da[l][k], shift));
                        }
                    }
                    for s1 in -1..=1 {
                        for s2 in -1..=1 {
                            if weight(k, s1) + weight(l, s2) == power && weight(k, s1) != 99 && weight(l, s2) != 99 {
                                let x = part(&a[k], s1);
                                let y = part(&a[l], s2);
                                f = f.add(&x.mul(&y)).sub(&y.mul(&x));
                            }
                        }
                    }
                    if !f.is_zero() {
                        ok = false;
                    }
                }
            }
            all_zero &= ok;
            blocks.push((name.to_string(), power, ok));
        }
    }
    for ak in &a {
        for r in 0..ak.rows {
            for c in 0..ak.cols {
                if !ak[(r, c)].is_zero() {
                    nonzero_entries += 1;
                }
            }
        }
    }
    TorusFlatness { blocks, all_zero, nonzero_entries, transversality: conn.transversality_defect() == 0.0 }
}

#[derive(Clone, Debug)]
pub struct TorusFlatness {
    /// (block, power of t, exactly zero)
    pub blocks: Vec<(String, i32, bool)>,
    pub all_zero: bool,
    pub nonzero_entries: usize,
    pub transversality: bool,
}

/// Plaquette curvature residuals of the CHSV connection at one step size.
#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub h: f64,
    pub t: C64,
    /// [D,D], [D,D̄], [D̄,D̄] relative residuals; one modulus makes the first and last vanish identically.
    pub blocks: [f64; 3],
    /// Relative residual of ∂ω − Aᵀω − ωA for the pairing ω in the frame.
    pub omega_parallel: f64,
    pub transversality: f64,
}

fn max_abs(m: &Mat<C64>) -> f64 {
    let mut x: f64 = 0.0;
    for r in 0..m.rows {
        for c in 0..m.cols {
            x = x.max(m[(r, c)].norm());
        }
    }
    x
}

/// Real-direction connection A_x = A_t + A_t̄, A_y = i(A_t − A_t̄) of the CHSV family.
fn real_components(conn: &FrameConnection<C64>, t: C64) -> Result<(Mat<C64>, Mat<C64>), ConnectionError> {
    let (h, a) = conn.chsv(&t)?;
    let i = C64::new(0.0, 1.0);
    Ok((h[0].add(&a[0]), h[0].sub(&a[0]).scale(&i)))
}

/// Edge-midpoint plaquette curvature of D^{(t)} around the square of side h centred at t0.
pub fn flatness_residual(chart: &SpecialChart, t0: C64, h: f64, t: C64) -> Result<FlatnessReport, ConnectionError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(ConnectionError::BadStep(h));
    }
    if (t.norm() - 1.0).abs() > 1e-12 {
        return Err(ConnectionError::NotUnitary(t.norm()));
    }
    let hh = C64::new(h / 2.0, 0.0);
    let hv = C64::new(0.0, h / 2.0);
    let pts = [t0 + hh, t0 - hh, t0 + hv, t0 - hv, t0];
    let conns: Vec<FrameConnection<C64>> = pts.par_iter().map(|&p| quintic_frame_connection(chart, p)).collect::<Result<_, _>>()?;
    let (_, ay_e) = real_components(&conns[0], t)?;
    let (_, ay_w) = real_components(&conns[1], t)?;
    let (ax_n, _) = real_components(&conns[2], t)?;
    let (ax_s, _) = real_components(&conns[3], t)?;
    let (ax, ay) = real_components(&conns[4], t)?;
    let inv_h = C64::new(1.0 / h, 0.0);
    let dx_ay = ay_e.sub(&ay_w).scale(&inv_h);
    let dy_ax = ax_n.sub(&ax_s).scale(&inv_h);
    let comm = ax.commutator(&ay);
    let f = dx_ay.sub(&dy_ax).add(&comm);
    let scale = max_abs(&dx_ay).max(max_abs(&dy_ax)).max(max_abs(&comm)).max(1e-300);
    // pairing in the frame, ω_B = BᵀΣB, is parallel: ∂ω_B = A^{(t)ᵀ}ω_B + ω_B A^{(t)}
    let omega = |c: &FrameConnection<C64>| c.frame.transpose().mul(&chart.sigma).mul(&c.frame);
    let dx_om = omega(&conns[0]).sub(&omega(&conns[1])).scale(&inv_h);
    let dy_om = omega(&conns[2]).sub(&omega(&conns[3])).scale(&inv_h);
    let om = omega(&conns[4]);
    let rx = dx_om.sub(&ax.transpose().mul(&om)).sub(&om.mul(&ax));
    let ry = dy_om.sub(&ay.transpose().mul(&om)).sub(&om.mul(&ay));
    let oscale = max_abs(&dx_om).max(max_abs(&dy_om)).max(max_abs(&om));
    Ok(FlatnessReport {
        h,
        t,
        blocks: [0.0, max_abs(&f) / scale, 0.0],
        omega_parallel: max_abs(&rx).max(max_abs(&ry)) / oscale,
        transversality: conns[4].transversality_defect() / max_abs(&conns[4].a_hol[0]),
    })
}

/// Residuals at h and h/2 with the observed order log₂(r_h / r_{h/2}).
pub fn flatness_convergence(chart: &SpecialChart, t0: C64, h: f64, t: C64) -> Result<(FlatnessReport, FlatnessReport, f64), ConnectionError> {
    let a = flatness_residual(chart, t0, h, t)?;
    let b = flatness_residual(chart, t0, h / 2.0, t)?;
    let slope = (a.blocks[1] / b.blocks[1]).log2();
    Ok((a, b, slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard_fuchs::frobenius_basis;
    use crate::scalar::qi;

    fn chart() -> SpecialChart {
        let f = frobenius_basis(&PFOperator::quintic(), 40, None).unwrap();
        SpecialChart::new(f, qi(5), 1.6e-4).unwrap()
    }

    #[test]
    fn companion_form_and_invariance() {
        let op = PFOperator::quintic();
        let f = frobenius_basis(&op, 12, None).unwrap();
        let gm = gauss_manin_matrix(&op, &f).unwrap();
        assert_eq!(gm.matrix[1][0], TruncSeries::<Q>::one(f.trunc_order));
        assert!(gm.is_flat().unwrap());
        // last column: −p_k/p_4 at z = 0 is (0, 0, 0, 0) for the quintic
        for r in 0..4 {
            assert!(gm.matrix[r][3].coeff(0) == qi(0));
        }
    }

    #[test]
    fn companion_matches_theta_of_solutions() {
        let op = PFOperator::quintic();
        let f = frobenius_basis(&op, 30, None).unwrap();
        let gm = gauss_manin_matrix(&op, &f).unwrap();
        let z = C64::new(1e-4, 2e-5);
        let jets = theta_jets(&f, z, 4);
        for sol in &jets {
            let mut pred = C64::new(0.0, 0.0);
            for r in 0..4 {
                pred += gm.matrix[r][3].to_c64().eval_c64(z) * sol[r];
            }
            assert!((pred - sol[4]).norm() <= 1e-10 * sol[4].norm().max(1.0));
        }
    }

    #[test]
    fn quintic_frame_transversality_and_flatness() {
        let c = chart();
        let t0 = c.t_of_z(C64::new(1e-4, 0.0));
        let conn = quintic_frame_connection(&c, t0).unwrap();
        assert!(conn.transversality_defect() < 1e-10 * max_abs(&conn.a_hol[0]));
        for t in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)] {
            let (a, b, slope) = flatness_convergence(&c, t0, 1e-3, t).unwrap();
            assert!(a.blocks[1] <= 1e-4, "{a:?}");
            assert!((1.8..=2.2).contains(&slope), "slope {slope}");
            assert!(a.omega_parallel <= 1e-4 && b.omega_parallel <= a.omega_parallel);
        }
    }

    #[test]
    fn torus_chsv_exactly_flat() {
        let g = TorusGeometry::new();
        let r = torus_chsv_curvature(&g);
        assert!(r.transversality);
        assert!(r.nonzero_entries > 0);
        assert!(r.all_zero, "{:?}", r.blocks);
    }

    #[test]
    fn higgs_and_frobenius_on_torus() {
        let g = TorusGeometry::new();
        let s = g.sample();
        let h = h_pairing(&s);
        let (theta, hinv) = higgs_field(&s, &h).unwrap();
        let graded = graded_higgs_field(&theta, &h);
        assert_eq!(higgs_commutator(&graded), 0.0);
        assert_eq!(higgs_nilpotence(&graded), 0.0);
        // on the tangent bundle alone the blocks do not commute
        assert!(higgs_commutator(&theta) > 0.0);
        let fr = frobenius_product(&s.c, &hinv);
        assert_eq!(fr.commutativity, 0.0);
        assert_eq!(fr.associativity, higgs_commutator(&theta));
        assert!(fr.associativity > 0.0);
        assert_eq!(fr.ratio_to_yukawa, Some(Gq::i()));
    }

    #[test]
    fn chsv_special_cases() {
        let c = chart();
        let p = c.point_t(c.t_of_z(C64::new(1e-4, 0.0))).unwrap();
        let s = c.sample(&p).unwrap();
        let one = chsv_connection(&s, &C64::new(1.0, 0.0), false).unwrap();
        assert_eq!(one.theta.len(), 1);
        assert!(matches!(chsv_connection(&s, &C64::new(0.0, 0.0), false), Err(ConnectionError::ZeroT)));
        assert!(matches!(chsv_connection(&s, &C64::new(2.0, 0.0), false), Err(ConnectionError::NotUnitary(_))));
        assert!(chsv_connection(&s, &C64::new(2.0, 0.0), true).is_ok());
        let mut s0 = s.clone();
        s0.c = Tensor3::from_fn(1, |_, _, _| C64::new(0.0, 0.0));
        let z = chsv_connection(&s0, &C64::new(1.0, 0.0), false).unwrap();
        assert!(z.theta[0].is_zero());
    }
}
