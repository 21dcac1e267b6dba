//! Geometric quantization of a linear symplectic space: the prequantum line bundle,
//! Gaussian states holomorphic in a polarization, and parallel transport by Witten's
//! projective connection over Siegel space.
//!
//! States are kept in the unitary gauge as ψ(t) = exp(s + Lᵀt + ½tᵀAt) on ℝ^{2n};
//! [`GaussianState`] is the same state in holomorphic coordinates z = Πt of a polarization,
//! ψ = exp(−¼g(t,t))·exp(s + l·z + ½zᵀQz).

use crate::scalar::C64;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("symplectic form is not antisymmetric and invertible")]
    BadOmega,
    #[error("J is not a positive compatible complex structure: {0}")]
    NotPolarization(String),
    #[error("Z is not in Siegel space: {0}")]
    NotSiegel(String),
    #[error("dJ is not tangent to Siegel space: |J dJ + dJ J| = {0:e}")]
    NotTangent(f64),
    #[error("state is not normalizable (exponent not negative definite, min eigenvalue {0:e})")]
    NotNormalizable(f64),
    #[error("state is not holomorphic in the polarization: residual {0:e}")]
    NotHolomorphic(f64),
    #[error("path leaves Siegel space at segment {segment}, step {step}")]
    LeftSiegel { segment: usize, step: usize },
    #[error("normalizability lost at segment {segment}, step {step}")]
    LostNormalizability { segment: usize, step: usize },
    #[error("loop is not closed")]
    OpenLoop,
    #[error("holonomy is not scalar: deviation {0:e}")]
    NotScalar(f64),
    #[error("dimension mismatch: expected {0}, got {1}")]
    Dimension(usize, usize),
    #[error("steps must be at least 1")]
    NoSteps,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

const I: C64 = C64::new(0.0, 1.0);

fn real(m: &DMatrix<f64>) -> CMat {
    m.map(c)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.norm()))
}

/// The standard form ω = [[0, I], [−I, 0]] in coordinates t = (x, y).
pub fn standard_omega(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |r, k| {
        if k == r + n {
            1.0
        } else if r == k + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// Real symplectic basis S (columns) with SᵀωS = standard form.
pub fn darboux_basis(omega: &DMatrix<f64>) -> Result<DMatrix<f64>, QuantError> {
    let m = omega.nrows();
    if m % 2 != 0 || (omega + omega.transpose()).amax() > 1e-12 * omega.amax() {
        return Err(QuantError::BadOmega);
    }
    let n = m / 2;
    let w = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * omega * b)[(0, 0)];
    let mut rest: Vec<DVector<f64>> = (0..m).map(|k| DVector::from_fn(m, |i, _| f64::from(i == k))).collect();
    let (mut es, mut fs) = (Vec::new(), Vec::new());
    while !rest.is_empty() {
        let e = rest.remove(0);
        let (k, val) = rest.iter().enumerate().map(|(k, f)| (k, w(&e, f))).max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).ok_or(QuantError::BadOmega)?;
        if val.abs() < 1e-12 {
            return Err(QuantError::BadOmega);
        }
        let f = rest.remove(k) / val;
        for r in rest.iter_mut() {
            let (rf, re) = (w(r, &f), w(&e, r));
            *r = &*r - &e * rf - &f * re;
        }
        es.push(e);
        fs.push(f);
    }
    let cols: Vec<DVector<f64>> = es.into_iter().chain(fs).collect();
    let _ = n;
    Ok(DMatrix::from_columns(&cols))
}

/// A positive compatible complex structure with its Siegel representative and projectors.
#[derive(Clone, Debug)]
pub struct Polarization {
    pub omega: DMatrix<f64>,
    pub j: DMatrix<f64>,
    /// Z with holomorphic coordinates z = Π t, Π = [I, Z]·S⁻¹ for the Darboux basis S.
    pub z: CMat,
    /// Rows are the (1,0) covectors: ΠJ = √−1 Π.
    pub pi: CMat,
    /// Columns span W^{1,0} with ΠV = 1.
    pub v: CMat,
    /// ½(1 ∓ √−1 J).
    pub p10: CMat,
    pub p01: CMat,
}

/// J of the Siegel point Z for the standard form: the real J with [I, Z]J = √−1[I, Z].
pub fn j_of_z(z: &CMat) -> Result<DMatrix<f64>, QuantError> {
    let n = z.nrows();
    let m = stacked(z);
    let minv = m.clone().try_inverse().ok_or_else(|| QuantError::NotSiegel("Im Z singular".into()))?;
    let d = CMat::from_fn(2 * n, 2 * n, |r, k| if r != k { c(0.0) } else if r < n { I } else { -I });
    Ok((minv * d * m).map(|x| x.re))
}

/// dJ at Z in the direction dZ: M⁻¹[D, dM M⁻¹]M with M = [[I, Z], [I, Z̄]].
pub fn dj_of_z(z: &CMat, dz: &CMat) -> Result<DMatrix<f64>, QuantError> {
    let n = z.nrows();
    let m = stacked(z);
    let minv = m.clone().try_inverse().ok_or_else(|| QuantError::NotSiegel("Im Z singular".into()))?;
    let d = CMat::from_fn(2 * n, 2 * n, |r, k| if r != k { c(0.0) } else if r < n { I } else { -I });
    let mut dm = CMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for k in 0..n {
            dm[(r, n + k)] = dz[(r, k)];
            dm[(n + r, n + k)] = dz[(r, k)].conj();
        }
    }
    let x = &dm * &minv;
    Ok((&minv * (&d * &x - &x * &d) * &m).map(|x| x.re))
}

fn stacked(z: &CMat) -> CMat {
    let n = z.nrows();
    CMat::from_fn(2 * n, 2 * n, |r, k| {
        let (rr, conj) = if r < n { (r, false) } else { (r - n, true) };
        let x = if k < n { c(f64::from(rr == k)) } else { z[(rr, k - n)] };
        if conj {
            x.conj()
        } else {
            x
        }
    })
}

/// Checks Z = Zᵀ and Im Z ≻ 0.
pub fn check_siegel(z: &CMat) -> Result<(), QuantError> {
    let n = z.nrows();
    if z.ncols() != n {
        return Err(QuantError::Dimension(n, z.ncols()));
    }
    let asym = max_abs(&(z - z.transpose()));
    if asym > 1e-12 * max_abs(z).max(1.0) {
        return Err(QuantError::NotSiegel(format!("not symmetric ({asym:e})")));
    }
    let im = DMatrix::<f64>::from_fn(n, n, |r, k| 0.5 * (z[(r, k)].im + z[(k, r)].im));
    let lo = im.symmetric_eigen().eigenvalues.min();
    if !(lo > 0.0) {
        return Err(QuantError::NotSiegel(format!("Im Z has eigenvalue {lo:e}")));
    }
    Ok(())
}

impl Polarization {
    /// Polarization of the Siegel point Z for the standard form.
    pub fn from_siegel(z: &CMat) -> Result<Self, QuantError> {
        check_siegel(z)?;
        let n = z.nrows();
        Self::new(standard_omega(n), j_of_z(z)?)
    }

    pub fn new(omega: DMatrix<f64>, j: DMatrix<f64>) -> Result<Self, QuantError> {
        let m = omega.nrows();
        if j.nrows() != m || j.ncols() != m {
            return Err(QuantError::Dimension(m, j.nrows()));
        }
        let s = darboux_basis(&omega)?;
        let n = m / 2;
        let scale = j.amax().max(1.0);
        let id = DMatrix::<f64>::identity(m, m);
        if (&j * &j + &id).amax() > 1e-10 * scale * scale {
            return Err(QuantError::NotPolarization("J² ≠ −1".into()));
        }
        if (j.transpose() * &omega * &j - &omega).amax() > 1e-10 * scale * scale * omega.amax() {
            return Err(QuantError::NotPolarization("ω not of type (1,1)".into()));
        }
        let g = &omega * &j;
        let gs = (&g + g.transpose()) * 0.5;
        if gs.clone().symmetric_eigen().eigenvalues.min() <= 0.0 {
            return Err(QuantError::NotPolarization("ω(u, Ju) not positive".into()));
        }
        // in Darboux coordinates x = S⁻¹t, J' = S⁻¹JS; (1,0) covectors are rows of [I, Z]
        let sinv = s.clone().try_inverse().ok_or(QuantError::BadOmega)?;
        let jd = real(&(&sinv * &j * &s));
        let p10d = (CMat::identity(m, m) - jd.map(|x| x * I)) * c(0.5);
        // rows w of P10 satisfy wJ = iw; normalise by the x-block
        let cand = p10d;
        let mut best: Option<CMat> = None;
        for rows in [cand.rows(0, n).into_owned(), cand.rows(n, n).into_owned()] {
            let xblock = rows.columns(0, n).into_owned();
            if let Some(inv) = xblock.try_inverse() {
                let p = &inv * &rows;
                if best.as_ref().map_or(true, |b: &CMat| max_abs(&p) < max_abs(b)) {
                    best = Some(p);
                }
            }
        }
        let pid = best.ok_or_else(|| QuantError::NotPolarization("no holomorphic frame".into()))?;
        let z = pid.columns(n, n).into_owned();
        check_siegel(&z)?;
        let pi = &pid * real(&sinv);
        let stack = CMat::from_fn(m, m, |r, k| if r < n { pi[(r, k)] } else { pi[(r - n, k)].conj() });
        let inv = stack.try_inverse().ok_or_else(|| QuantError::NotPolarization("singular frame".into()))?;
        let v = inv.columns(0, n).into_owned();
        let jc = real(&j);
        let p10 = (CMat::identity(m, m) - jc.map(|x| x * I)) * c(0.5);
        let p01 = (CMat::identity(m, m) + jc.map(|x| x * I)) * c(0.5);
        Ok(Polarization { omega, j, z, pi, v, p10, p01 })
    }

    pub fn n(&self) -> usize {
        self.omega.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    /// g = ωJ, g(u, v) = ω(u, Jv).
    pub fn metric(&self) -> DMatrix<f64> {
        &self.omega * &self.j
    }

    /// Exponent matrix of the vacuum: A = −½ωJ.
    pub fn vacuum_exponent(&self) -> CMat {
        real(&self.metric()) * c(-0.5)
    }

    pub fn omega_c(&self) -> CMat {
        real(&self.omega)
    }

    /// Largest violation of Z = Zᵀ, Im Z ≻ 0, ΠJ = √−1Π, P10 + P01 = 1, P10² = P10.
    pub fn invariants(&self) -> f64 {
        let m = self.dim();
        let jc = real(&self.j);
        let a = max_abs(&(&self.pi * &jc - &self.pi * I));
        let b = max_abs(&(&self.p10 + &self.p01 - CMat::identity(m, m)));
        let d = max_abs(&(&self.p10 * &self.p10 - &self.p10));
        let e = max_abs(&(&self.z - self.z.transpose()));
        a.max(b).max(d).max(e)
    }
}

/// A Gaussian state in holomorphic coordinates of a polarization.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    pub q: CMat,
    pub l: CVec,
    pub s: C64,
}

/// The same state in the unitary gauge on ℝ^{2n}.
#[derive(Clone, Debug, PartialEq)]
pub struct FullGaussian {
    pub a: CMat,
    pub l: CVec,
    pub s: C64,
}

impl GaussianState {
    pub fn vacuum(n: usize) -> Self {
        GaussianState { q: CMat::zeros(n, n), l: CVec::zeros(n), s: c(0.0) }
    }

    pub fn to_full(&self, pol: &Polarization) -> Result<FullGaussian, QuantError> {
        let n = pol.n();
        if self.q.nrows() != n || self.l.len() != n {
            return Err(QuantError::Dimension(n, self.q.nrows()));
        }
        let qs = (&self.q + self.q.transpose()) * c(0.5);
        let a = pol.vacuum_exponent() + pol.pi.transpose() * qs * &pol.pi;
        let l = pol.pi.transpose() * &self.l;
        Ok(FullGaussian { a, l, s: self.s })
    }

    pub fn from_full(f: &FullGaussian, pol: &Polarization) -> Result<Self, QuantError> {
        let r = f.holomorphy_residual(pol);
        if r > 1e-8 {
            return Err(QuantError::NotHolomorphic(r));
        }
        let q = pol.v.transpose() * (&f.a - pol.vacuum_exponent()) * &pol.v;
        let l = pol.v.transpose() * &f.l;
        Ok(GaussianState { q, l, s: f.s })
    }
}

impl FullGaussian {
    pub fn dim(&self) -> usize {
        self.l.len()
    }

    /// B = A + (√−1/2)ω, so that D_i ψ = (L + Bt)_i ψ.
    pub fn b(&self, omega: &CMat) -> CMat {
        &self.a + omega * (I * 0.5)
    }

    pub fn exponent(&self, t: &[f64]) -> C64 {
        let tv = CVec::from_iterator(t.len(), t.iter().map(|x| c(*x)));
        self.s + self.l.dot(&tv) + (tv.transpose() * &self.a * &tv)[(0, 0)] * 0.5
    }

    pub fn value(&self, t: &[f64]) -> C64 {
        self.exponent(t).exp()
    }

    /// ‖P01ᵀB‖ + ‖P01ᵀL‖ relative to ‖B‖ + ‖L‖: D_{t̄}ψ = 0 iff this vanishes.
    pub fn holomorphy_residual(&self, pol: &Polarization) -> f64 {
        let b = self.b(&pol.omega_c());
        let pt = pol.p01.transpose();
        let r = max_abs(&(&pt * &b)) + (&pt * &self.l).iter().fold(0.0f64, |a, x| a.max(x.norm()));
        r / (max_abs(&b) + self.l.iter().fold(0.0f64, |a, x| a.max(x.norm()))).max(f64::MIN_POSITIVE)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        FullGaussian { a: self.a.clone(), l: self.l.clone(), s: self.s + factor.ln() }
    }
}

/// (D_i ψ)(t) = ∂_iψ + (√−1/2)ω_ij t^j ψ along the direction `dir`.
pub fn prequantum_derivative(state: &FullGaussian, omega: &DMatrix<f64>, dir: &[f64], t: &[f64]) -> C64 {
    let oc = real(omega);
    let tv = CVec::from_iterator(t.len(), t.iter().map(|x| c(*x)));
    let v = &state.l + state.b(&oc) * tv;
    let d = CVec::from_iterator(dir.len(), dir.iter().map(|x| c(*x)));
    d.dot(&v) * state.value(t)
}

/// (D_iD_jψ)(t) = (B_ji + v_i v_j) ψ.
pub fn prequantum_second(state: &FullGaussian, omega: &DMatrix<f64>, i: usize, j: usize, t: &[f64]) -> C64 {
    let oc = real(omega);
    let b = state.b(&oc);
    let tv = CVec::from_iterator(t.len(), t.iter().map(|x| c(*x)));
    let v = &state.l + &b * tv;
    (b[(j, i)] + v[i] * v[j]) * state.value(t)
}

/// ∫ |ψ|² ω^n/n! over ℝ^{2n}, the metric weight e^{−h}, h = ½g(t,t), being absorbed by the
/// unitary gauge. Equals |Pf ω| π^n det(R)^{−½} exp(2 Re s + cᵀR⁻¹c), R = −Re A, c = Re L.
pub fn state_norm(state: &FullGaussian, omega: &DMatrix<f64>) -> Result<f64, QuantError> {
    let m = state.dim();
    let r = DMatrix::<f64>::from_fn(m, m, |i, k| -0.5 * (state.a[(i, k)].re + state.a[(k, i)].re));
    let eig = r.clone().symmetric_eigen().eigenvalues;
    let lo = eig.min();
    if !(lo > 1e-14 * eig.amax()) {
        return Err(QuantError::NotNormalizable(-lo));
    }
    let cvec = DVector::<f64>::from_iterator(m, state.l.iter().map(|x| x.re));
    let rinv = r.clone().try_inverse().ok_or(QuantError::NotNormalizable(0.0))?;
    let quad = (cvec.transpose() * rinv * &cvec)[(0, 0)];
    let pf = omega.determinant().abs().sqrt();
    let n = (m / 2) as i32;
    Ok(pf * std::f64::consts::PI.powi(n) / r.determinant().sqrt() * (2.0 * state.s.re + quad).exp())
}

/// Sign σ in ∇^{(1,0)} = δ^{(1,0)} + σ·¼(dJω⁻¹)^{i̲j̲}D_{i̲}D_{j̲}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSign {
    /// σ = −1, the form written with the prequantum derivative above.
    Literal,
    /// σ = +1, the sign for which the connection preserves holomorphy with that derivative.
    Holomorphic,
}

impl GeneratorSign {
    pub fn sigma(self) -> f64 {
        match self {
            GeneratorSign::Literal => -1.0,
            GeneratorSign::Holomorphic => 1.0,
        }
    }
}

/// Second-order part of Witten's connection along a tangent dJ.
#[derive(Clone, Debug)]
pub struct WittenGenerator {
    /// ¼ P10 dJ ω⁻¹ P10ᵀ, contracted with D_iD_j.
    pub full: CMat,
    /// The same in the holomorphic frame: ¼ Π dJ ω⁻¹ Πᵀ, contracted with D_{z_a}D_{z_b}.
    pub holomorphic: CMat,
    pub sign: GeneratorSign,
}

/// Rate of change of a Gaussian under ∂_sψ = −σ·¼ M^{ij}D_iD_jψ.
#[derive(Clone, Debug)]
pub struct GaussianRate {
    pub a: CMat,
    pub l: CVec,
    pub s: C64,
}

pub fn witten_generator(pol: &Polarization, dj: &DMatrix<f64>, sign: GeneratorSign) -> Result<WittenGenerator, QuantError> {
    let m = pol.dim();
    if dj.nrows() != m || dj.ncols() != m {
        return Err(QuantError::Dimension(m, dj.nrows()));
    }
    let anti = (&pol.j * dj + dj * &pol.j).amax();
    if anti > 1e-9 * dj.amax().max(1e-300) * pol.j.amax() {
        return Err(QuantError::NotTangent(anti));
    }
    let oinv = pol.omega.clone().try_inverse().ok_or(QuantError::BadOmega)?;
    let x = real(&(dj * oinv));
    let full = &pol.p10 * &x * pol.p10.transpose() * c(0.25);
    let holomorphic = &pol.pi * &x * pol.pi.transpose() * c(0.25);
    Ok(WittenGenerator { full, holomorphic, sign })
}

impl WittenGenerator {
    /// Closed-form action on Gaussian data: with B = A + (√−1/2)ω and K = −σ·full,
    /// Ȧ = 2BᵀKB, L̇ = 2BᵀKL, ṡ = tr(KA) + LᵀKL.
    pub fn rate(&self, state: &FullGaussian, omega: &CMat) -> GaussianRate {
        let k = &self.full * c(-self.sign.sigma());
        let b = state.b(omega);
        let bt = b.transpose();
        let a = &bt * &k * &b * c(2.0);
        let l = &bt * &k * &state.l * c(2.0);
        let s = (&k * &state.a).trace() + (state.l.transpose() * &k * &state.l)[(0, 0)];
        GaussianRate { a, l, s }
    }
}

/// d/ds of the holomorphy condition (P01ᵀB, P01ᵀL) along the flow; zero when the
/// generator commutes with D_{t̄} up to multiples of D_{t̄}.
pub fn holomorphy_drift(pol: &Polarization, dj: &DMatrix<f64>, state: &FullGaussian, sign: GeneratorSign) -> Result<f64, QuantError> {
    let gen = witten_generator(pol, dj, sign)?;
    let oc = pol.omega_c();
    let rate = gen.rate(state, &oc);
    let dp01 = real(dj).map(|x| x * I * 0.5);
    let b = state.b(&oc);
    let rb = dp01.transpose() * &b + pol.p01.transpose() * &rate.a;
    let rl = dp01.transpose() * &state.l + pol.p01.transpose() * &rate.l;
    let scale = max_abs(&b) + state.l.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    Ok((max_abs(&rb) + rl.iter().fold(0.0f64, |a, x| a.max(x.norm()))) / scale.max(f64::MIN_POSITIVE))
}

/// Result of transport along a polyline in Siegel space.
#[derive(Clone, Debug)]
pub struct Transported {
    pub state: FullGaussian,
    pub end: Polarization,
    pub holomorphy_residual: f64,
}

fn axpy(x: &FullGaussian, h: f64, r: &GaussianRate) -> FullGaussian {
    FullGaussian { a: &x.a + &r.a * c(h), l: &x.l + &r.l * c(h), s: x.s + r.s * h }
}

fn rate_at(z: &CMat, dz: &CMat, state: &FullGaussian, sign: GeneratorSign) -> Result<GaussianRate, QuantError> {
    let pol = Polarization::from_siegel(z)?;
    let dj = dj_of_z(z, dz)?;
    Ok(witten_generator(&pol, &dj, sign)?.rate(state, &pol.omega_c()))
}

fn normalizable(state: &FullGaussian) -> bool {
    let m = state.dim();
    let r = DMatrix::<f64>::from_fn(m, m, |i, k| -0.5 * (state.a[(i, k)].re + state.a[(k, i)].re));
    r.symmetric_eigen().eigenvalues.min() > 0.0
}

/// Parallel transport of a state along the polyline of Siegel matrices, RK4 with `steps` per segment.
pub fn transport(state: &FullGaussian, path: &[CMat], steps: usize, sign: GeneratorSign) -> Result<Transported, QuantError> {
    if steps == 0 {
        return Err(QuantError::NoSteps);
    }
    let first = path.first().ok_or(QuantError::OpenLoop)?;
    let start = Polarization::from_siegel(first)?;
    let r0 = state.holomorphy_residual(&start);
    if r0 > 1e-8 {
        return Err(QuantError::NotHolomorphic(r0));
    }
    let mut x = state.clone();
    for (seg, w) in path.windows(2).enumerate() {
        let dz = &w[1] - &w[0];
        let h = 1.0 / steps as f64;
        let at = |u: f64| &w[0] + &dz * c(u);
        for k in 0..steps {
            let u = k as f64 * h;
            let wrap = |e: QuantError| match e {
                QuantError::NotSiegel(_) | QuantError::NotPolarization(_) => QuantError::LeftSiegel { segment: seg, step: k },
                other => other,
            };
            let k1 = rate_at(&at(u), &dz, &x, sign).map_err(wrap)?;
            let k2 = rate_at(&at(u + h / 2.0), &dz, &axpy(&x, h / 2.0, &k1), sign).map_err(wrap)?;
            let k3 = rate_at(&at(u + h / 2.0), &dz, &axpy(&x, h / 2.0, &k2), sign).map_err(wrap)?;
            let k4 = rate_at(&at(u + h), &dz, &axpy(&x, h, &k3), sign).map_err(wrap)?;
            x = FullGaussian {
                a: &x.a + (&k1.a + &k2.a * c(2.0) + &k3.a * c(2.0) + &k4.a) * c(h / 6.0),
                l: &x.l + (&k1.l + &k2.l * c(2.0) + &k3.l * c(2.0) + &k4.l) * c(h / 6.0),
                s: x.s + (k1.s + k2.s * 2.0 + k3.s * 2.0 + k4.s) * (h / 6.0),
            };
            x.a = (&x.a + x.a.transpose()) * c(0.5);
            if !normalizable(&x) {
                return Err(QuantError::LostNormalizability { segment: seg, step: k });
            }
        }
    }
    let end = Polarization::from_siegel(path.last().expect("nonempty"))?;
    let holomorphy_residual = x.holomorphy_residual(&end);
    Ok(Transported { state: x, end, holomorphy_residual })
}

/// The state of H_{J'} that intertwines the Heisenberg action with `state` ∈ H_J:
/// solves P01'ᵀB' = 0 and αᵀ(1 + √−1ω⁻¹B') = 0 for every α annihilating `state`.
pub fn bogoliubov_image(state: &FullGaussian, end: &Polarization) -> Result<CMat, QuantError> {
    let m = state.dim();
    let oc = end.omega_c();
    let oinv = oc.clone().try_inverse().ok_or(QuantError::BadOmega)?;
    let b = state.b(&oc);
    // annihilators: left kernel of 1 + iω⁻¹B
    let k = CMat::identity(m, m) + &oinv * &b * I;
    let svd = k.transpose().svd(false, true);
    let vt = svd.v_t.ok_or(QuantError::BadOmega)?;
    let sv = &svd.singular_values;
    let tol = 1e-9 * sv.max().max(1.0);
    let kernel: Vec<CVec> = (0..sv.len()).filter(|&i| sv[i] < tol).map(|i| vt.row(i).adjoint().into_owned()).collect();
    // unknown B' (m×m): equations P01'ᵀB' = 0 (m×m) and αᵀ + iαᵀω⁻¹B' = 0
    let nvar = m * m;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut rhs: Vec<C64> = Vec::new();
    let pt = end.p01.transpose();
    for r in 0..m {
        for col in 0..m {
            let mut row = vec![c(0.0); nvar];
            for q in 0..m {
                row[q * m + col] = pt[(r, q)];
            }
            rows.push(row);
            rhs.push(c(0.0));
        }
    }
    for a in &kernel {
        let w = (a.transpose() * &oinv).map(|x| x * I);
        for col in 0..m {
            let mut row = vec![c(0.0); nvar];
            for q in 0..m {
                row[q * m + col] = w[(0, q)];
            }
            rows.push(row);
            rhs.push(-a[col]);
        }
    }
    let mat = CMat::from_fn(rows.len(), nvar, |r, k| rows[r][k]);
    let rv = CVec::from_vec(rhs);
    let sol = mat.svd(true, true).solve(&rv, 1e-12).map_err(|_| QuantError::BadOmega)?;
    let bp = CMat::from_fn(m, m, |r, k| sol[r * m + k]);
    Ok(&bp - &oc * (I * 0.5))
}

/// Holonomy of a closed loop on a family of Gaussian states.
#[derive(Clone, Debug)]
pub struct Holonomy {
    pub scalar: C64,
    pub log_scalar: C64,
    /// Largest change of (A, L) or spread of the per-state scalars.
    pub deviation: f64,
    pub steps: usize,
}

/// Vacuum, coherent and squeezed test states of a polarization.
pub fn test_states(pol: &Polarization) -> Result<Vec<FullGaussian>, QuantError> {
    let n = pol.n();
    let mut out = vec![GaussianState::vacuum(n).to_full(pol)?];
    for k in 0..n {
        let mut g = GaussianState::vacuum(n);
        g.l[k] = C64::new(0.3, -0.2 * k as f64);
        out.push(g.to_full(pol)?);
        let mut g = GaussianState::vacuum(n);
        g.q[(k, k)] = c(0.1);
        if n > 1 {
            g.q[(0, n - 1)] += C64::new(0.0, 0.05);
            g.q[(n - 1, 0)] += C64::new(0.0, 0.05);
        }
        out.push(g.to_full(pol)?);
    }
    Ok(out)
}

pub fn holonomy_scalar(states: &[FullGaussian], loop_path: &[CMat], steps: usize, sign: GeneratorSign) -> Result<Holonomy, QuantError> {
    let (Some(first), Some(last)) = (loop_path.first(), loop_path.last()) else {
        return Err(QuantError::OpenLoop);
    };
    if max_abs(&(first - last)) > 1e-14 * max_abs(first).max(1.0) {
        return Err(QuantError::OpenLoop);
    }
    let moved: Vec<FullGaussian> =
        states.par_iter().map(|s| transport(s, loop_path, steps, sign).map(|t| t.state)).collect::<Result<_, _>>()?;
    let mut dev: f64 = 0.0;
    let logs: Vec<C64> = states.iter().zip(&moved).map(|(a, b)| b.s - a.s).collect();
    for (a, b) in states.iter().zip(&moved) {
        dev = dev.max(max_abs(&(&b.a - &a.a))).max((&b.l - &a.l).iter().fold(0.0f64, |m, x| m.max(x.norm())));
    }
    for lg in &logs {
        dev = dev.max((lg.exp() - logs[0].exp()).norm());
    }
    Ok(Holonomy { scalar: logs[0].exp(), log_scalar: logs[0], deviation: dev, steps })
}

/// Square loop Z0 → Z0 + εX → Z0 + εX + εY → Z0 + εY → Z0.
pub fn square_loop(z0: &CMat, x: &CMat, y: &CMat, side: f64) -> Vec<CMat> {
    let a = z0 + x * c(side);
    let b = &a + y * c(side);
    let d = z0 + y * c(side);
    vec![z0.clone(), a, b, d, z0.clone()]
}

/// −⅛ tr(dJ^{(1,0)}(X) dJ^{(0,1)}(Y) − dJ^{(1,0)}(Y) dJ^{(0,1)}(X)) at Z.
pub fn witten_curvature(z: &CMat, x: &CMat, y: &CMat) -> Result<C64, QuantError> {
    let pol = Polarization::from_siegel(z)?;
    let jx = real(&dj_of_z(z, x)?);
    let jy = real(&dj_of_z(z, y)?);
    let up = |m: &CMat| &pol.p10 * m * &pol.p01;
    let dn = |m: &CMat| &pol.p01 * m * &pol.p10;
    Ok(((up(&jx) * dn(&jy)).trace() - (up(&jy) * dn(&jx)).trace()) * (-0.125))
}

/// ∫∫ of the curvature over the square, 3×3 Gauss–Legendre.
pub fn curvature_integral(z0: &CMat, x: &CMat, y: &CMat, side: f64) -> Result<C64, QuantError> {
    let nodes = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let mut acc = c(0.0);
    for (u, wu) in nodes {
        for (v, wv) in nodes {
            let z = z0 + x * c(side * (u + 1.0) / 2.0) + y * c(side * (v + 1.0) / 2.0);
            acc += witten_curvature(&z, x, y)? * (wu * wv);
        }
    }
    Ok(acc * (side * side / 4.0))
}

/// Holonomy of a square loop against the curvature prediction exp(−∫F).
#[derive(Clone, Debug)]
pub struct LoopReport {
    pub holonomy: Holonomy,
    pub curvature_integral: C64,
    /// log(scalar) + ∫F.
    pub mismatch: f64,
    /// log(scalar) / (−∫F).
    pub constant_ratio: C64,
}

pub fn square_loop_report(z0: &CMat, x: &CMat, y: &CMat, side: f64, steps: usize, sign: GeneratorSign) -> Result<LoopReport, QuantError> {
    let pol = Polarization::from_siegel(z0)?;
    let states = test_states(&pol)?;
    let holonomy = holonomy_scalar(&states, &square_loop(z0, x, y, side), steps, sign)?;
    let f = curvature_integral(z0, x, y, side)?;
    Ok(LoopReport {
        mismatch: (holonomy.log_scalar + f).norm(),
        constant_ratio: if f.norm() > 0.0 { -holonomy.log_scalar / f } else { c(0.0) },
        curvature_integral: f,
        holonomy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zi(n: usize) -> CMat {
        CMat::identity(n, n) * I
    }

    fn z1(v: C64) -> CMat {
        CMat::from_element(1, 1, v)
    }

    fn random_holomorphic(pol: &Polarization, rng: &mut ChaCha8Rng) -> FullGaussian {
        let n = pol.n();
        let mut g = GaussianState::vacuum(n);
        for r in 0..n {
            g.l[r] = C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            for k in r..n {
                let x = C64::new(rng.gen_range(-0.08..0.08), rng.gen_range(-0.08..0.08));
                g.q[(r, k)] = x;
                g.q[(k, r)] = x;
            }
        }
        g.s = C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-3.0..3.0));
        g.to_full(pol).unwrap()
    }

    #[test]
    fn j_of_z_matches_closed_form_one_mode() {
        // J(τ) = (1/y)[[−x, −|τ|²], [1, x]]
        for tau in [C64::new(0.0, 1.0), C64::new(0.3, 0.7), C64::new(-1.2, 2.5)] {
            let j = j_of_z(&z1(tau)).unwrap();
            let (x, y) = (tau.re, tau.im);
            let want = DMatrix::from_row_slice(2, 2, &[-x / y, -tau.norm_sqr() / y, 1.0 / y, x / y]);
            assert!((j - want).amax() < 1e-14);
        }
    }

    #[test]
    fn polarization_invariants_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let mut z = CMat::zeros(n, n);
            for r in 0..n {
                for k in r..n {
                    let x = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2));
                    z[(r, k)] = x;
                    z[(k, r)] = x;
                }
                z[(r, r)] += C64::new(0.0, 1.5);
            }
            let p = Polarization::from_siegel(&z).unwrap();
            assert!(p.invariants() < 1e-12);
            assert!(max_abs(&(&p.z - &z)) < 1e-12);
            let q = Polarization::new(p.omega.clone(), p.j.clone()).unwrap();
            assert!(max_abs(&(&q.z - &z)) < 1e-12);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(Polarization::new(standard_omega(1), bad), Err(QuantError::NotPolarization(_))));
    }

    #[test]
    fn prequantum_derivative_examples() {
        let om = standard_omega(1);
        let one = FullGaussian { a: CMat::zeros(2, 2), l: CVec::zeros(2), s: c(0.0) };
        let (a, b) = (0.7, -1.3);
        let d = prequantum_derivative(&one, &om, &[1.0, 0.0], &[a, b]);
        assert!((d - I * (0.5 * b)).norm() < 1e-15);
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let vac = GaussianState::vacuum(1).to_full(&pol).unwrap();
        assert!(vac.holomorphy_residual(&pol) < 1e-15);
    }

    #[test]
    fn prequantum_commutator_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pol = Polarization::from_siegel(&zi(2)).unwrap();
        for _ in 0..5 {
            let st = random_holomorphic(&pol, &mut rng);
            let t: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let psi = st.value(&t);
            for i in 0..4 {
                for j in 0..4 {
                    let comm = prequantum_second(&st, &pol.omega, i, j, &t) - prequantum_second(&st, &pol.omega, j, i, &t);
                    let want = -I * pol.omega[(i, j)] * psi;
                    assert!((comm - want).norm() <= 1e-12 * psi.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn second_derivative_against_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let st = random_holomorphic(&pol, &mut rng);
        let om = pol.omega.clone();
        let t = [0.4, -0.3];
        let h = 1e-4;
        // D_j f as a function, then D_i of it by centred differences
        let dj = |tt: &[f64], j: usize| prequantum_derivative(&st, &om, &[f64::from(j == 0), f64::from(j == 1)], tt);
        for i in 0..2 {
            for j in 0..2 {
                let mut tp = t;
                let mut tm = t;
                tp[i] += h;
                tm[i] -= h;
                let deriv = (dj(&tp, j) - dj(&tm, j)) / (2.0 * h);
                let conn = I * 0.5 * (om[(i, 0)] * t[0] + om[(i, 1)] * t[1]) * dj(&t, j);
                let fd = deriv + conn;
                let exact = prequantum_second(&st, &om, i, j, &t);
                assert!((fd - exact).norm() < 1e-6 * exact.norm().max(1.0), "{fd} {exact}");
            }
        }
    }

    /// 2D trapezoid quadrature of |ψ|² on a box.
    fn quadrature_norm(st: &FullGaussian, half: f64, k: usize) -> f64 {
        let h = 2.0 * half / k as f64;
        let mut acc = 0.0;
        for a in 0..=k {
            for b in 0..=k {
                let t = [-half + a as f64 * h, -half + b as f64 * h];
                let w = (if a == 0 || a == k { 0.5 } else { 1.0 }) * (if b == 0 || b == k { 0.5 } else { 1.0 });
                acc += w * st.value(&t).norm_sqr();
            }
        }
        acc * h * h
    }

    #[test]
    fn norms_against_quadrature() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let vac = GaussianState::vacuum(1).to_full(&pol).unwrap();
        let nv = state_norm(&vac, &pol.omega).unwrap();
        assert!((nv - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((quadrature_norm(&vac, 12.0, 600) - nv).abs() < 1e-9);
        let scaled = vac.scaled(C64::new(0.0, 3.0));
        assert!((state_norm(&scaled, &pol.omega).unwrap() - 9.0 * nv).abs() < 1e-9);
        let mut sq = GaussianState::vacuum(1);
        sq.q[(0, 0)] = c(0.2);
        sq.l[0] = C64::new(0.1, 0.4);
        let sf = sq.to_full(&pol).unwrap();
        let ns = state_norm(&sf, &pol.omega).unwrap();
        assert!((quadrature_norm(&sf, 14.0, 700) - ns).abs() < 1e-8 * ns);
        let mut bad = GaussianState::vacuum(1);
        bad.q[(0, 0)] = c(0.6);
        assert!(matches!(state_norm(&bad.to_full(&pol).unwrap(), &pol.omega), Err(QuantError::NotNormalizable(_))));
    }

    #[test]
    fn squeezed_vacuum_determinant_ratio() {
        // the Z = i vacuum realised in H_{2i} is a squeezed state; its norm relative to the
        // Z = 2i vacuum (both with ψ(0) = 1) is a ratio of Gaussian determinants
        let p1 = Polarization::from_siegel(&zi(1)).unwrap();
        let p2 = Polarization::from_siegel(&z1(C64::new(0.0, 2.0))).unwrap();
        let v1 = GaussianState::vacuum(1).to_full(&p1).unwrap();
        let v2 = GaussianState::vacuum(1).to_full(&p2).unwrap();
        let sq = FullGaussian { a: bogoliubov_image(&v1, &p2).unwrap(), l: CVec::zeros(2), s: c(0.0) };
        assert!(sq.holomorphy_residual(&p2) < 1e-12);
        let n1 = state_norm(&v1, &p1.omega).unwrap();
        let n2 = state_norm(&v2, &p2.omega).unwrap();
        assert!((n1 - n2).abs() < 1e-12);
        let ns = state_norm(&sq, &p2.omega).unwrap();
        let det = |a: &CMat| DMatrix::<f64>::from_fn(2, 2, |i, k| -0.5 * (a[(i, k)].re + a[(k, i)].re)).determinant();
        let want = (det(&v2.a) / det(&sq.a)).sqrt();
        assert!((ns / n2 - want).abs() < 1e-12);
        assert!((quadrature_norm(&sq, 14.0, 700) / quadrature_norm(&v2, 14.0, 700) - want).abs() < 1e-8);
        assert!(want > 1.0, "{want}");
    }

    #[test]
    fn generator_closed_form_one_mode() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        // hand-derived: dJ/dx at τ = i is diag(−1, 1); dJ/dy is [[0, −1], [−1, 0]]
        let djx = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let djy = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!((dj_of_z(&zi(1), &z1(c(1.0))).unwrap() - &djx).amax() < 1e-14);
        assert!((dj_of_z(&zi(1), &z1(I)).unwrap() - &djy).amax() < 1e-14);
        let gx = witten_generator(&pol, &djx, GeneratorSign::Holomorphic).unwrap();
        let gy = witten_generator(&pol, &djy, GeneratorSign::Holomorphic).unwrap();
        // ¼[1, i](dJ ω⁻¹)[1, i]ᵀ with ω⁻¹ = [[0, −1], [1, 0]]
        assert!((gx.holomorphic[(0, 0)] - I * 0.5).norm() < 1e-15);
        assert!((gy.holomorphic[(0, 0)] - c(-0.5)).norm() < 1e-15);
        let zero = witten_generator(&pol, &DMatrix::zeros(2, 2), GeneratorSign::Holomorphic).unwrap();
        assert_eq!(max_abs(&zero.full), 0.0);
        assert!(matches!(witten_generator(&pol, &DMatrix::identity(2, 2), GeneratorSign::Holomorphic), Err(QuantError::NotTangent(_))));
    }

    #[test]
    fn holomorphy_preserved_only_with_one_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=2 {
            let mut z = zi(n);
            z[(0, 0)] += c(0.3);
            let pol = Polarization::from_siegel(&z).unwrap();
            for _ in 0..5 {
                let st = random_holomorphic(&pol, &mut rng);
                let mut dz = CMat::zeros(n, n);
                for r in 0..n {
                    for k in r..n {
                        let x = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        dz[(r, k)] = x;
                        dz[(k, r)] = x;
                    }
                }
                let dj = dj_of_z(&z, &dz).unwrap();
                assert!(holomorphy_drift(&pol, &dj, &st, GeneratorSign::Holomorphic).unwrap() < 1e-12);
                assert!(holomorphy_drift(&pol, &dj, &st, GeneratorSign::Literal).unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn transport_constant_path_and_composition() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let st = test_states(&pol).unwrap()[1].clone();
        let same = transport(&st, &[zi(1), zi(1)], 10, GeneratorSign::Holomorphic).unwrap();
        assert_eq!(same.state, st);
        let a = zi(1);
        let m = z1(C64::new(0.1, 1.4));
        let b = z1(C64::new(0.2, 2.0));
        let full = transport(&st, &[a.clone(), m.clone(), b.clone()], 200, GeneratorSign::Holomorphic).unwrap();
        let half = transport(&st, &[a, m.clone()], 200, GeneratorSign::Holomorphic).unwrap();
        let rest = transport(&half.state, &[m, b], 200, GeneratorSign::Holomorphic).unwrap();
        assert!(max_abs(&(&full.state.a - &rest.state.a)) < 1e-10);
        assert!((full.state.s - rest.state.s).norm() < 1e-10);
    }

    #[test]
    fn vacuum_transport_matches_bogoliubov() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let vac = GaussianState::vacuum(1).to_full(&pol).unwrap();
        let end = z1(C64::new(0.0, 2.0));
        let out = transport(&vac, &[zi(1), end.clone()], 1000, GeneratorSign::Holomorphic).unwrap();
        assert!(out.holomorphy_residual < 1e-8);
        let want = bogoliubov_image(&vac, &out.end).unwrap();
        assert!(max_abs(&(&out.state.a - &want)) < 1e-10, "{} vs {}", out.state.a, want);
        // expressed in the endpoint frame the output is a squeezed state, Q ≠ 0
        let g = GaussianState::from_full(&out.state, &out.end).unwrap();
        assert!(g.q[(0, 0)].norm() > 1e-3);
        // norm is preserved by the unitary connection
        let n0 = state_norm(&vac, &pol.omega).unwrap();
        let n1 = state_norm(&out.state, &pol.omega).unwrap();
        assert!((n0 - n1).abs() < 1e-8 * n0, "{n0} {n1}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let st = test_states(&pol).unwrap()[2].clone();
        let path = [zi(1), z1(C64::new(0.5, 1.8))];
        let at = |k| transport(&st, &path, k, GeneratorSign::Holomorphic).unwrap().state;
        let (a, b, cc) = (at(10), at(20), at(40));
        let e1 = max_abs(&(&a.a - &b.a)) + (a.s - b.s).norm();
        let e2 = max_abs(&(&b.a - &cc.a)) + (b.s - cc.s).norm();
        let order = (e1 / e2).log2();
        assert!((3.6..=4.4).contains(&order), "order {order}");
    }

    #[test]
    fn degenerate_loop_and_errors() {
        let pol = Polarization::from_siegel(&zi(1)).unwrap();
        let st = test_states(&pol).unwrap();
        let h = holonomy_scalar(&st, &[zi(1), zi(1)], 5, GeneratorSign::Holomorphic).unwrap();
        assert_eq!(h.scalar, c(1.0));
        assert_eq!(h.deviation, 0.0);
        assert!(matches!(holonomy_scalar(&st, &[zi(1), z1(c(1.0) + I)], 5, GeneratorSign::Holomorphic), Err(QuantError::OpenLoop)));
        let out = transport(&st[0], &[zi(1), z1(C64::new(0.0, -1.0))], 10, GeneratorSign::Holomorphic);
        assert!(matches!(out, Err(QuantError::LeftSiegel { segment: 0, .. })));
    }

    #[test]
    fn small_loop_holonomy_is_scalar_and_matches_curvature() {
        let mut z2 = zi(2);
        z2[(0, 1)] = c(0.2);
        z2[(1, 0)] = c(0.2);
        for (n, z0) in [(1, zi(1)), (1, z1(C64::new(0.4, 1.3))), (2, z2)] {
            let x = CMat::identity(n, n);
            let y = CMat::identity(n, n) * I;
            let r = square_loop_report(&z0, &x, &y, 1e-2, 1000, GeneratorSign::Holomorphic).unwrap();
            assert!(r.holonomy.deviation < 1e-8, "{r:?}");
            assert!((r.holonomy.scalar.norm() - 1.0).abs() < 1e-8);
            assert!(r.mismatch < 1e-6 && (r.constant_ratio - c(1.0)).norm() < 1e-6, "{r:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn siegel_membership_and_holomorphy_along_random_paths(x0 in -1.0f64..1.0, y0 in 0.5f64..2.0, dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
            let a = z1(C64::new(x0, y0));
            let b = z1(C64::new(x0 + dx, y0 + dy));
            let pol = Polarization::from_siegel(&a).unwrap();
            let st = test_states(&pol).unwrap()[1].clone();
            let out = transport(&st, &[a, b], 50, GeneratorSign::Holomorphic).unwrap();
            prop_assert!(out.holomorphy_residual < 1e-8);
            prop_assert!(out.end.invariants() < 1e-12);
        }
    }
}
