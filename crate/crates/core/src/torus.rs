//! Exact special geometry of the complex torus ℂ³/(ℤ³ + iℤ³) around τ = 0.
//!
//! Everything is a polynomial in 18 variables: the nine Beltrami coordinates τ
//! followed by their conjugates w = τ̄.

use crate::exterior::Form;
use crate::kuranishi::{holomorphic_form_expansion, solve_maurer_cartan, torus_model, MultiIndex};
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::scalar::{Gq, Scalar, Q};
use crate::special_geometry::{SpecialGeometrySample, Tensor3};

pub const N: usize = 9;
pub const VARS: usize = 2 * N;
pub const H3: usize = 20;
const DEG: u32 = 4;

#[derive(Clone, Debug)]
pub struct TorusGeometry {
    /// Ω(τ) on the 20 basis 3-forms.
    pub omega: Vec<Poly>,
    /// Q(u, v) = −∫ u∧v on the basis 3-forms.
    pub pairing: Mat<Gq>,
    /// e^{−K} at τ = 0.
    pub exp_mk0: Q,
    /// K − K(0).
    pub kpot: Poly,
}

/// Hodge degree p of each frame column: Ω, D_iΩ, conj D_iΩ, conj Ω.
pub fn frame_grading() -> Vec<i32> {
    let mut g = vec![3];
    g.extend(std::iter::repeat(2).take(N));
    g.extend(std::iter::repeat(1).take(N));
    g.push(0);
    g
}

fn basis_form(k: usize) -> Form {
    let mut v = vec![Gq::zero(); H3];
    v[k] = Gq::one();
    Form::from_h3(&v)
}

impl TorusGeometry {
    pub fn new() -> Self {
        let model = torus_model();
        let dirs: Vec<Vec<Q>> = (0..N).map(|i| (0..N).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
        let phi = solve_maurer_cartan(&model, &dirs, 3).expect("torus directions are harmonic");
        let series = holomorphic_form_expansion(&model, &phi).expect("torus model has contraction data");
        let mut omega = vec![Poly::zero(VARS, DEG); H3];
        for (idx, v) in &series {
            let MultiIndex(e) = idx;
            let mut exps: Vec<u8> = e.iter().map(|&x| x as u8).collect();
            exps.extend(std::iter::repeat(0).take(N));
            for (c, x) in omega.iter_mut().zip(v) {
                *c = c.add(&Poly::monomial(VARS, DEG, exps.clone(), x.clone()));
            }
        }
        let pairing = Mat::from_fn(H3, H3, |a, b| basis_form(a).wedge(&basis_form(b)).integrate().negate());
        let omega_bar: Vec<Poly> = omega.iter().map(|p| p.conj_swap()).collect();
        let p = q_poly(&pairing, &omega, &omega_bar).scale(&Gq::int(0, -1));
        let c0 = p.constant_term();
        assert!(c0.im.is_zero(), "e^(-K) is real");
        let kpot = p.neg_log_normalized().expect("e^(-K) nonzero");
        TorusGeometry { omega, pairing, exp_mk0: c0.re, kpot }
    }

    pub fn q(&self, u: &[Gq], v: &[Gq]) -> Gq {
        self.pairing.bilinear(u, v)
    }

    /// ∂^{idx} Ω at τ = 0.
    pub fn d_omega(&self, idx: &[usize]) -> Vec<Gq> {
        self.omega.iter().map(|p| p.deriv_at_zero(idx)).collect()
    }

    pub fn metric(&self) -> Mat<Gq> {
        Mat::from_fn(N, N, |i, j| self.kpot.deriv_at_zero(&[i, N + j]))
    }

    pub fn yukawa(&self) -> Tensor3<Gq> {
        let om = self.d_omega(&[]);
        Tensor3::from_fn(N, |i, j, k| self.q(&om, &self.d_omega(&[i, j, k])))
    }

    pub fn sample(&self) -> SpecialGeometrySample<Gq> {
        let g = self.metric();
        let ginv = g.inverse().expect("metric is nondegenerate");
        let e = crate::scalar::q_to_f64(&self.exp_mk0);
        SpecialGeometrySample {
            z: None,
            t: vec![crate::scalar::C64::new(0.0, 0.0); N],
            k: -e.ln(),
            exp_mk: Gq::real(self.exp_mk0.clone()),
            g,
            ginv,
            c: self.yukawa(),
            lambda: Gq::one(),
            dk: (0..N).map(|i| self.kpot.deriv_at_zero(&[i])).collect(),
            dg: (0..N).map(|k| Mat::from_fn(N, N, |i, j| self.kpot.deriv_at_zero(&[i, k, N + j]))).collect(),
        }
    }

    /// Both sides of ∂_k∂_l̄G_ij̄ − G^{pq̄}∂_kG_iq̄ ∂_l̄G_pj̄ = G_ij̄G_kl̄ + G_il̄G_kj̄ − e^{2K} C_ikp C̄_jlq G^{pq̄},
    /// indexed by (i, j, k, l) in row-major order.
    pub fn curvature_sides(&self) -> (Vec<Gq>, Vec<Gq>) {
        let s = self.sample();
        let g = &s.g;
        let ginv = &s.ginv;
        let e2k = Gq::real(Q::one() / (&self.exp_mk0 * &self.exp_mk0));
        let dbar_g: Vec<Mat<Gq>> = (0..N).map(|l| Mat::from_fn(N, N, |i, j| self.kpot.deriv_at_zero(&[i, N + j, N + l]))).collect();
        let mut lhs = Vec::with_capacity(N * N * N * N);
        let mut rhs = Vec::with_capacity(N * N * N * N);
        for i in 0..N {
            for j in 0..N {
                for k in 0..N {
                    for l in 0..N {
                        let mut a = self.kpot.deriv_at_zero(&[i, k, N + j, N + l]);
                        let mut b = g[(i, j)].times(&g[(k, l)]).plus(&g[(i, l)].times(&g[(k, j)]));
                        for p in 0..N {
                            for qq in 0..N {
                                let w = &ginv[(qq, p)];
                                if w.is_zero() {
                                    continue;
                                }
                                a = a.minus(&s.dg[k][(i, qq)].times(w).times(&dbar_g[l][(p, j)]));
                                let cc = s.c.get(i, k, p).times(&s.c.get(j, l, qq).conj());
                                b = b.minus(&e2k.times(&cc).times(w));
                            }
                        }
                        lhs.push(a);
                        rhs.push(b);
                    }
                }
            }
        }
        (lhs, rhs)
    }

    /// Frame columns Ω, D_iΩ = ∂_iΩ + (∂_iK)Ω, their conjugates, as polynomials.
    pub fn frame_columns(&self) -> Vec<Vec<Poly>> {
        let mut cols = vec![self.omega.clone()];
        let mut dcols = Vec::new();
        for i in 0..N {
            let ki = self.kpot.derivative(i);
            let c: Vec<Poly> = self.omega.iter().map(|p| p.derivative(i).add(&ki.mul(p))).collect();
            dcols.push(c);
        }
        cols.extend(dcols.iter().cloned());
        cols.extend(dcols.iter().map(|c| c.iter().map(|p| p.conj_swap()).collect::<Vec<_>>()));
        cols.push(self.omega.iter().map(|p| p.conj_swap()).collect());
        cols
    }

    /// Frame matrix, its first and second derivatives at τ = 0.
    pub fn frame_jets(&self) -> (Mat<Gq>, Vec<Mat<Gq>>, Vec<Vec<Mat<Gq>>>) {
        let cols = self.frame_columns();
        let at = |idx: &[usize]| Mat::from_fn(H3, H3, |a, b| cols[b][a].deriv_at_zero(idx));
        let b0 = at(&[]);
        let d1: Vec<Mat<Gq>> = (0..VARS).map(|k| at(&[k])).collect();
        let d2: Vec<Vec<Mat<Gq>>> = (0..VARS).map(|l| (0..VARS).map(|k| at(&[l, k])).collect()).collect();
        (b0, d1, d2)
    }

    /// Gauss–Manin connection A_k = B⁻¹∂_kB and its derivatives ∂_lA_k at τ = 0.
    pub fn connection_jets(&self) -> (Vec<Mat<Gq>>, Vec<Vec<Mat<Gq>>>) {
        let (b0, d1, d2) = self.frame_jets();
        let binv = b0.inverse().expect("Hodge frame is a basis");
        let a: Vec<Mat<Gq>> = d1.iter().map(|d| binv.mul(d)).collect();
        let da = (0..VARS)
            .map(|l| (0..VARS).map(|k| binv.mul(&d2[l][k]).sub(&a[l].mul(&a[k]))).collect())
            .collect();
        (a, da)
    }
}

impl Default for TorusGeometry {
    fn default() -> Self {
        Self::new()
    }
}

/// Σ_ab u_a S_ab v_b for polynomial vectors.
pub fn q_poly(s: &Mat<Gq>, u: &[Poly], v: &[Poly]) -> Poly {
    let mut acc = Poly::zero(u[0].nvars, u[0].max_deg.min(v[0].max_deg));
    for a in 0..s.rows {
        for b in 0..s.cols {
            let c = &s[(a, b)];
            if c.is_zero() || u[a].is_zero() || v[b].is_zero() {
                continue;
            }
            acc = acc.add(&u[a].mul(&v[b]).scale(c));
        }
    }
    acc
}
