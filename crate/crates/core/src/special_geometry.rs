//! Kähler potential, Weil–Petersson metric, Yukawa couplings, instanton numbers
//! and the curvature identity, from period data.

use crate::dd::{Cdd, Dd, DD_PI};
use crate::linalg::Mat;
use crate::picard_fuchs::{mirror_map, PeriodFrame, PfError};
use crate::scalar::{q_to_f64, Scalar, C64, Q};
use crate::series::{LogSeries, SeriesError, TruncSeries};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Pf(#[from] PfError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("Yukawa coupling Q(Pi, theta^3 Pi) carries log terms: pairing inconsistent")]
    LogInYukawa,
    #[error("non-integral instanton number at degree {0}: {1}")]
    NonIntegral(usize, String),
    #[error("requested degree {0} beyond the available q-order {1}")]
    BeyondTruncation(usize, usize),
    #[error("pairing has entries off the anti-diagonal a+b=3; no real frame")]
    NoRealFrame,
    #[error("nonpositive e^(-K) = {0} at this point")]
    NonPositive(f64),
    #[error("singular metric")]
    SingularMetric,
    #[error("Newton solve for the flat coordinate did not converge at tau = {0}")]
    NoConvergence(String),
    #[error("step {0} outside [1e-5, 1e-2]")]
    BadStep(f64),
}

/// C_zzz = κ·Q(Π, θ³Π) and C_ttt(q) = C_zzz/(ϖ_0² (θt)³) composed with z(q).
pub fn yukawa_series(frame: &PeriodFrame, kappa: &Q) -> Result<(TruncSeries<Q>, TruncSeries<Q>), GeometryError> {
    let pi = frame.solutions.clone();
    let c = frame.q_series(&pi, &frame.theta_vector(3))?;
    if c.max_log_power() != 0 {
        return Err(GeometryError::LogInYukawa);
    }
    let czzz = c.block(0).scale(kappa);
    let w0 = frame.solutions[0].block(0);
    let t = LogSeries::from_series(frame.solutions[1].block(0).div(&w0)?).add(&LogSeries::log_z(frame.trunc_order))?;
    let tt = t.theta();
    if tt.max_log_power() != 0 {
        return Err(GeometryError::LogInYukawa);
    }
    let dt = tt.block(0);
    let denom = w0.mul(&w0)?.mul(&dt)?.mul(&dt)?.mul(&dt)?;
    let in_z = czzz.div(&denom)?;
    let (_, zq) = mirror_map(frame)?;
    let cttt = in_z.compose(&zq)?;
    Ok((czzz, cttt))
}

/// n_d from C_ttt = n_0 + Σ_d n_d d³ q^d/(1−q^d); returns [n_0, n_1, …, n_dmax].
pub fn instanton_numbers(cttt: &TruncSeries<Q>, d_max: usize) -> Result<Vec<BigInt>, GeometryError> {
    if d_max >= cttt.order() {
        return Err(GeometryError::BeyondTruncation(d_max, cttt.order().saturating_sub(1)));
    }
    let c0 = cttt.coeff(0);
    if !c0.is_integer() {
        return Err(GeometryError::NonIntegral(0, crate::scalar::render_q(&c0)));
    }
    let mut n: Vec<Q> = vec![c0];
    for m in 1..=d_max {
        let mut rest = cttt.coeff(m);
        for d in 1..m {
            if m % d == 0 {
                let d3 = Q::from_integer(BigInt::from(d * d * d));
                rest = rest - &n[d] * d3;
            }
        }
        let nm = rest / Q::from_integer(BigInt::from(m * m * m));
        if !nm.is_integer() {
            return Err(GeometryError::NonIntegral(m, crate::scalar::render_q(&nm)));
        }
        n.push(nm);
    }
    Ok(n.into_iter().map(|x| x.to_integer()).collect())
}

/// κΣ on the rescaled periods ϖ_k/(2πi)^k; requires Σ supported on a+b=3.
pub fn real_pairing(frame: &PeriodFrame, kappa: &Q) -> Result<Mat<Q>, GeometryError> {
    for a in 0..4 {
        for b in 0..4 {
            if a + b != 3 && !Scalar::is_zero(&frame.pairing[(a, b)]) {
                return Err(GeometryError::NoRealFrame);
            }
        }
    }
    Ok(frame.pairing.scale(kappa))
}

/// Bivariate truncated series Σ c_ab s^a w^b, used for derivatives of K.
#[derive(Clone, Debug)]
pub struct Bivariate {
    pub n: usize,
    pub c: Vec<Vec<C64>>,
}

impl Bivariate {
    pub fn zero(n: usize) -> Self {
        Bivariate { n, c: vec![vec![C64::new(0.0, 0.0); n]; n] }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut r = Self::zero(n);
        for a in 0..n {
            for b in 0..n {
                let x = self.c[a][b];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n - a {
                    for d in 0..n - b {
                        r.c[a + c][b + d] += x * o.c[c][d];
                    }
                }
            }
        }
        r
    }

    /// log, for a nonzero constant term.
    pub fn log(&self) -> Self {
        let n = self.n;
        let c0 = self.c[0][0];
        let mut x = self.clone();
        for row in x.c.iter_mut() {
            for v in row.iter_mut() {
                *v /= c0;
            }
        }
        x.c[0][0] = C64::new(0.0, 0.0);
        let mut out = Self::zero(n);
        out.c[0][0] = c0.ln();
        let mut pw = x.clone();
        for k in 1..2 * n {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            for a in 0..n {
                for b in 0..n {
                    out.c[a][b] += pw.c[a][b] * (sign / k as f64);
                }
            }
            pw = pw.mul(&x);
        }
        out
    }

    /// ∂_s^a ∂_w^b at 0.
    pub fn deriv(&self, a: usize, b: usize) -> C64 {
        self.c[a][b] * (fact(a) * fact(b))
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Period data around a point of the flat coordinate t = ϖ_1/ϖ_0.
#[derive(Clone, Debug)]
pub struct FlatPoint {
    pub z: C64,
    pub log_z: C64,
    pub t: C64,
    /// Π̂_k = ϖ_k/(2πi)^k as Taylor series in s = t − t_0.
    pub raw: Vec<TruncSeries<C64>>,
    /// η-gauge Π̂/ϖ_0.
    pub eta: Vec<TruncSeries<C64>>,
    /// ϖ_0 as a series in s.
    pub w0: TruncSeries<C64>,
}

impl FlatPoint {
    /// Taylor-shifts every series so that the base point is exactly `t0`.
    pub fn recenter(self, t0: C64) -> FlatPoint {
        let d = t0 - self.t;
        let shift = |f: &TruncSeries<C64>| -> TruncSeries<C64> {
            let n = f.order();
            let c = (0..n)
                .map(|k| {
                    let mut acc = C64::new(0.0, 0.0);
                    let mut binom = 1.0;
                    let mut dp = C64::new(1.0, 0.0);
                    for j in k..n {
                        acc += f.coeff(j) * binom * dp;
                        binom = binom * (j + 1) as f64 / (j + 1 - k) as f64;
                        dp *= d;
                    }
                    acc
                })
                .collect();
            TruncSeries::new(c, n)
        };
        FlatPoint {
            z: self.z,
            log_z: self.log_z,
            t: t0,
            raw: self.raw.iter().map(shift).collect(),
            eta: self.eta.iter().map(shift).collect(),
            w0: shift(&self.w0),
        }
    }

    /// ∂_t^j of the η-gauge period vector.
    pub fn d_eta(&self, j: usize) -> Vec<C64> {
        self.eta.iter().map(|s| s.coeff(j) * fact(j)).collect()
    }
    pub fn d_raw(&self, j: usize) -> Vec<C64> {
        self.raw.iter().map(|s| s.coeff(j) * fact(j)).collect()
    }
}

/// Numerical evaluation of the period frame in the flat coordinate.
#[derive(Clone, Debug)]
pub struct SpecialChart {
    pub frame: PeriodFrame,
    pub kappa: Q,
    pub r_eval: f64,
    pub jet: usize,
    pub sigma: Mat<C64>,
    theta_sols: Vec<Vec<LogSeries<C64>>>,
}

impl SpecialChart {
    pub fn new(frame: PeriodFrame, kappa: Q, r_eval: f64) -> Result<Self, GeometryError> {
        let sigma = real_pairing(&frame, &kappa)?.to_c64();
        let jet = 7;
        let theta_sols = frame
            .float_solutions()
            .iter()
            .map(|s| {
                let mut v = vec![s.clone()];
                for j in 1..=jet {
                    let next = v[j - 1].theta();
                    v.push(next);
                }
                v
            })
            .collect();
        Ok(SpecialChart { frame, kappa, r_eval, jet, sigma, theta_sols })
    }

    pub fn kappa_f64(&self) -> f64 {
        q_to_f64(&self.kappa)
    }

    /// Q(u, v) = uᵀ κΣ v.
    pub fn q(&self, u: &[C64], v: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..4 {
            for b in 0..4 {
                let s = self.sigma[(a, b)];
                if s != C64::new(0.0, 0.0) {
                    acc += u[a] * s * v[b];
                }
            }
        }
        acc
    }

    /// Π̂(u_0 + δ) as Taylor series in δ, with u = log z.
    fn u_jets(&self, z: C64, log_z: C64) -> Vec<TruncSeries<C64>> {
        let tpi = C64::new(0.0, 2.0 * PI);
        (0..4)
            .map(|k| {
                let norm = tpi.powi(k as i32).inv();
                let c = (0..=self.jet).map(|j| self.theta_sols[k][j].eval_c64(z, log_z) * norm / fact(j)).collect();
                TruncSeries::new(c, self.jet + 1)
            })
            .collect()
    }

    fn t_of_u(&self, u: C64) -> (C64, C64) {
        let z = u.exp();
        let w0 = self.theta_sols[0][0].eval_c64(z, u);
        let w1 = self.theta_sols[1][0].eval_c64(z, u);
        let dw0 = self.theta_sols[0][1].eval_c64(z, u);
        let dw1 = self.theta_sols[1][1].eval_c64(z, u);
        (w1 / w0, (dw1 * w0 - w1 * dw0) / (w0 * w0))
    }

    pub fn t_of_z(&self, z: C64) -> C64 {
        self.t_of_u(z.ln()).0
    }

    fn check_radius(&self, z: C64) -> Result<(), GeometryError> {
        if z.norm() > self.r_eval {
            Err(PfError::OutsideRadius(z.norm(), self.r_eval).into())
        } else {
            Ok(())
        }
    }

    pub fn point_z(&self, z: C64) -> Result<FlatPoint, GeometryError> {
        self.point_u(z.ln())
    }

    /// Solves t(u) = t_0 by Newton iteration from u ≈ t_0.
    pub fn point_t(&self, t0: C64) -> Result<FlatPoint, GeometryError> {
        let mut u = t0;
        for _ in 0..60 {
            let (t, dt) = self.t_of_u(u);
            let du = (t - t0) / dt;
            u -= du;
            if du.norm() < 1e-14 * (1.0 + u.norm()) {
                let p = self.point_u(u)?;
                return Ok(p.recenter(t0));
            }
        }
        Err(GeometryError::NoConvergence(crate::scalar::render_c64(t0)))
    }

    fn point_u(&self, u: C64) -> Result<FlatPoint, GeometryError> {
        let z = u.exp();
        self.check_radius(z)?;
        let pj = self.u_jets(z, u);
        let tser = pj[1].div(&pj[0])?.scale(&C64::new(0.0, 2.0 * PI));
        let t = tser.coeff(0);
        let sd = tser.sub(&TruncSeries::constant(t, self.jet + 1))?;
        let delta = sd.reversion()?;
        let raw: Vec<TruncSeries<C64>> = pj.iter().map(|p| p.compose(&delta)).collect::<Result<_, _>>()?;
        let w0 = raw[0].clone();
        let w0inv = w0.reciprocal()?;
        let eta = raw.iter().map(|p| p.mul(&w0inv)).collect::<Result<_, _>>()?;
        Ok(FlatPoint { z, log_z: u, t, raw, eta, w0 })
    }

    /// F(s, w) = Q(Π(t+s), conj Π(t+w̄)) for the η- or raw gauge.
    pub fn pairing_series(&self, p: &FlatPoint, eta: bool, n: usize) -> Bivariate {
        let v = if eta { &p.eta } else { &p.raw };
        let mut f = Bivariate::zero(n);
        for a in 0..n {
            let ua: Vec<C64> = v.iter().map(|s| s.coeff(a)).collect();
            for b in 0..n {
                let vb: Vec<C64> = v.iter().map(|s| s.coeff(b).conj()).collect();
                f.c[a][b] = self.q(&ua, &vb);
            }
        }
        f
    }

    /// K = −log(−i Q(Π, Π̄)) as a bivariate series in (t, t̄) offsets.
    pub fn k_series(&self, p: &FlatPoint, eta: bool, n: usize) -> Result<Bivariate, GeometryError> {
        let mut f = self.pairing_series(p, eta, n);
        for row in f.c.iter_mut() {
            for x in row.iter_mut() {
                *x *= C64::new(0.0, -1.0);
            }
        }
        let e = f.c[0][0];
        if !(e.re > 0.0) {
            return Err(GeometryError::NonPositive(e.re));
        }
        let mut k = f.log();
        for row in k.c.iter_mut() {
            for x in row.iter_mut() {
                *x = -*x;
            }
        }
        Ok(k)
    }

    pub fn sample(&self, p: &FlatPoint) -> Result<SpecialGeometrySample<C64>, GeometryError> {
        let ks = self.k_series(p, true, 4)?;
        let k = ks.c[0][0].re;
        let g = ks.deriv(1, 1);
        if g.norm() == 0.0 {
            return Err(GeometryError::SingularMetric);
        }
        let c = self.q(&p.d_eta(0), &p.d_eta(3));
        Ok(SpecialGeometrySample {
            z: Some(p.z),
            t: vec![p.t],
            k,
            exp_mk: C64::new((-k).exp(), 0.0),
            g: Mat::from_rows(vec![vec![g]]),
            ginv: Mat::from_rows(vec![vec![g.inv()]]),
            c: Tensor3::from_fn(1, |_, _, _| c),
            lambda: p.w0.coeff(0),
            dk: vec![ks.deriv(1, 0)],
            dg: vec![Mat::from_rows(vec![vec![ks.deriv(2, 1)]])],
        })
    }
}

/// Totally symmetric-by-contract 3-tensor of size n³.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Tensor3<S> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { n, data }
    }
    pub fn get(&self, i: usize, j: usize, k: usize) -> &S {
        &self.data[(i * self.n + j) * self.n + k]
    }
    /// Checks all six index permutations for exact equality.
    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| {
                (0..n).all(|k| {
                    let x = self.get(i, j, k);
                    x == self.get(j, i, k) && x == self.get(i, k, j) && x == self.get(k, j, i) && x == self.get(j, k, i) && x == self.get(k, i, j)
                })
            })
        })
    }
    /// Largest deviation from total symmetry, as a magnitude.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = self.get(i, j, k);
                    for y in [self.get(j, i, k), self.get(i, k, j), self.get(k, j, i)] {
                        m = m.max(x.minus(y).magnitude());
                    }
                }
            }
        }
        m
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

/// (K, G, C, λ, derivatives) at a moduli point.
#[derive(Clone, Debug)]
pub struct SpecialGeometrySample<S> {
    pub z: Option<C64>,
    pub t: Vec<C64>,
    /// Kähler potential; e^{−K} is kept exactly in `exp_mk`.
    pub k: f64,
    pub exp_mk: S,
    pub g: Mat<S>,
    pub ginv: Mat<S>,
    pub c: Tensor3<S>,
    pub lambda: S,
    pub dk: Vec<S>,
    /// dg[k] = ∂_k G.
    pub dg: Vec<Mat<S>>,
}

impl<S: Scalar> SpecialGeometrySample<S> {
    pub fn dim(&self) -> usize {
        self.g.rows
    }
    /// g_{ij̄} = e^{−K} G_{ij̄}.
    pub fn middle_metric(&self) -> Mat<S> {
        self.g.scale(&self.exp_mk)
    }
}

/// One-modulus curvature identity R = 2G² − e^{2K}|C|²/G, with R = ∂∂̄G − |∂G|²/G.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub h: f64,
    pub lhs_fd: f64,
    pub lhs_analytic: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Curvature of the middle metric g = e^{−K}G over −‖D²Ω‖²-weight e^{K}|C|²/G.
    pub twisted_ratio: f64,
}

pub fn curvature_rhs(s: &SpecialGeometrySample<C64>) -> f64 {
    let g = s.g[(0, 0)].re;
    let c = s.c.get(0, 0, 0).norm_sqr();
    2.0 * g * g - (2.0 * s.k).exp() * c / g
}

/// G = ∂∂̄K evaluated in double-double from the exact Frobenius coefficients.
#[derive(Clone, Debug)]
pub struct PreciseMetric {
    sols: Vec<LogSeries<Cdd>>,
    dsols: Vec<LogSeries<Cdd>>,
    sigma: Mat<Cdd>,
    r_eval: f64,
}

impl PreciseMetric {
    pub fn new(chart: &SpecialChart) -> Self {
        let conv = |s: &LogSeries<Q>| s.map(|c| Cdd::from_q(c));
        let sols: Vec<LogSeries<Cdd>> = chart.frame.solutions.iter().map(conv).collect();
        let dsols = sols.iter().map(|s| s.theta()).collect();
        let sigma = real_pairing(&chart.frame, &chart.kappa).expect("chart already validated").map(|x| Cdd::from_q(x));
        PreciseMetric { sols, dsols, sigma, r_eval: chart.r_eval }
    }

    fn periods(&self, u: Cdd) -> (Vec<Cdd>, Vec<Cdd>) {
        let z = u.exp();
        let w: Vec<Cdd> = self.sols.iter().map(|s| s.eval(&z, &u)).collect();
        let dw: Vec<Cdd> = self.dsols.iter().map(|s| s.eval(&z, &u)).collect();
        (w, dw)
    }

    /// G at flat coordinate t0, starting Newton from `u_guess`.
    pub fn g_at(&self, t0: C64, u_guess: C64) -> Result<Dd, GeometryError> {
        let target = Cdd::from_c64(t0);
        let mut u = Cdd::from_c64(u_guess);
        let mut converged = false;
        for _ in 0..20 {
            let (w, dw) = self.periods(u);
            let t = w[1] / w[0];
            let dt = (dw[1] * w[0] - w[1] * dw[0]) / (w[0] * w[0]);
            let du = (t - target) / dt;
            u = u - du;
            if du.norm_sqr().to_f64().sqrt() < 1e-29 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(GeometryError::NoConvergence(crate::scalar::render_c64(t0)));
        }
        let zf = u.exp().to_c64_();
        if zf.norm() > self.r_eval {
            return Err(PfError::OutsideRadius(zf.norm(), self.r_eval).into());
        }
        let (w, dw) = self.periods(u);
        let two_pi_i = Cdd::new(Dd::default(), DD_PI.ldexp(1));
        let mut norm = Cdd::one();
        let mut p0 = Vec::with_capacity(4);
        let mut p1 = Vec::with_capacity(4);
        let dt = (dw[1] * w[0] - w[1] * dw[0]) / (w[0] * w[0]);
        for k in 0..4 {
            let a = w[k] / norm;
            let da = dw[k] / norm;
            p0.push(a / w[0]);
            p1.push((da * w[0] - a * dw[0]) / (w[0] * w[0]) / dt);
            norm = norm * two_pi_i;
        }
        let q = |x: &[Cdd], y: &[Cdd]| -> Cdd {
            let mut acc = Cdd::zero();
            for a in 0..4 {
                for b in 0..4 {
                    if !Scalar::is_zero(&self.sigma[(a, b)]) {
                        acc = acc + x[a] * self.sigma[(a, b)] * y[b].conj();
                    }
                }
            }
            acc
        };
        let f00 = q(&p0, &p0);
        let f10 = q(&p1, &p0);
        let f01 = q(&p0, &p1);
        let f11 = q(&p1, &p1);
        let g = -(f11 / f00 - f10 * f01 / (f00 * f00));
        Ok(g.re)
    }
}

pub fn curvature_check(chart: &SpecialChart, t0: C64, h: f64) -> Result<CurvatureReport, GeometryError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(GeometryError::BadStep(h));
    }
    let p0 = chart.point_t(t0)?;
    let s0 = chart.sample(&p0)?;
    let pm = PreciseMetric::new(chart);
    let u0 = p0.log_z;
    let gd = |d: C64| pm.g_at(t0 + d, u0 + d);
    let g0d = gd(C64::new(0.0, 0.0))?;
    let diff = |d: C64| -> Result<f64, GeometryError> { Ok((gd(d)? - g0d).to_f64()) };
    let g0 = g0d.to_f64();
    let dxp = diff(C64::new(h, 0.0))?;
    let dxm = diff(C64::new(-h, 0.0))?;
    let dyp = diff(C64::new(0.0, h))?;
    let dym = diff(C64::new(0.0, -h))?;
    // ∂∂̄ = ¼Δ and ∂ = ½(∂_x − i∂_y)
    let lap = (dxp + dxm + dyp + dym) / (h * h);
    let dg = C64::new((dxp - dxm) / (2.0 * h), -(dyp - dym) / (2.0 * h)) * 0.5;
    let lhs_fd = lap / 4.0 - dg.norm_sqr() / g0;
    let ks = chart.k_series(&p0, true, 4)?;
    let lhs_analytic = ks.deriv(2, 2).re - ks.deriv(2, 1).norm_sqr() / g0;
    let rhs = curvature_rhs(&s0);
    // middle metric g = e^{-K} G; its curvature from the same bivariate data
    let kr = chart.k_series(&p0, true, 4)?;
    let twisted_ratio = twisted_curvature_ratio(&kr, s0.c.get(0, 0, 0).norm_sqr());
    Ok(CurvatureReport { h, lhs_fd, lhs_analytic, rhs, residual: (lhs_fd - rhs).abs() / rhs.abs(), twisted_ratio })
}

/// Curvature of the line metric g = e^{−K}G divided by −e^{K}|C|²/G.
fn twisted_curvature_ratio(k: &Bivariate, c2: f64) -> f64 {
    let n = k.n;
    // e^{-K} as a series: exp of −K via repeated multiplication of the nilpotent part
    let mut x = k.clone();
    let k00 = x.c[0][0];
    x.c[0][0] = C64::new(0.0, 0.0);
    for row in x.c.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    let mut e = Bivariate::zero(n);
    e.c[0][0] = C64::new(1.0, 0.0);
    let mut pw = e.clone();
    for j in 1..2 * n {
        pw = pw.mul(&x);
        for a in 0..n {
            for b in 0..n {
                e.c[a][b] += pw.c[a][b] / fact(j);
            }
        }
    }
    let scale = (-k00).exp();
    // G(s,w) = ∂_s∂_w K shifted
    let mut gser = Bivariate::zero(n);
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            gser.c[a][b] = k.c[a + 1][b + 1] * ((a + 1) * (b + 1)) as f64;
        }
    }
    let g = e.mul(&gser);
    let g00 = (g.c[0][0] * scale).re;
    let g10 = g.deriv(1, 0) * scale;
    let g11 = (g.deriv(1, 1) * scale).re;
    let r = g11 - g10.norm_sqr() / g00;
    let gw = k.deriv(1, 1).re;
    let kval = k00.re;
    let weight = kval.exp() * c2 / gw;
    r / (-weight)
}

/// Centered finite-difference cross-check of G = ∂∂̄K.
pub fn wp_metric_fd(chart: &SpecialChart, t0: C64, h: f64) -> Result<(f64, f64), GeometryError> {
    let kat = |t: C64| -> Result<f64, GeometryError> { Ok(chart.k_series(&chart.point_t(t)?, true, 2)?.c[0][0].re) };
    let p0 = chart.point_t(t0)?;
    let g = chart.k_series(&p0, true, 3)?.deriv(1, 1).re;
    let k0 = kat(t0)?;
    let lap = (kat(t0 + h)? + kat(t0 - h)? + kat(t0 + C64::new(0.0, h))? + kat(t0 - C64::new(0.0, h))? - 4.0 * k0) / (h * h);
    Ok((g, lap / 4.0))
}

pub fn bigint_to_string(n: &BigInt) -> String {
    n.to_string()
}

pub fn is_small_positive(x: &Q) -> bool {
    x.is_positive() && x.to_f64().map_or(false, |v| v < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard_fuchs::{frobenius_basis, PFOperator};
    use crate::scalar::qi;

    fn chart() -> SpecialChart {
        let f = frobenius_basis(&PFOperator::quintic(), 40, None).unwrap();
        SpecialChart::new(f, qi(5), 1.6e-4).unwrap()
    }

    #[test]
    fn quintic_yukawa_z() {
        let f = frobenius_basis(&PFOperator::quintic(), 8, None).unwrap();
        let (czzz, cttt) = yukawa_series(&f, &qi(5)).unwrap();
        for m in 0..8 {
            assert_eq!(czzz.coeff(m), Q::from_integer(BigInt::from(5) * BigInt::from(3125).pow(m as u32)));
        }
        assert_eq!(cttt.coeff(0), qi(5));
        assert_eq!(cttt.coeff(1), qi(2875));
    }

    #[test]
    fn instantons_quintic() {
        let f = frobenius_basis(&PFOperator::quintic(), 15, None).unwrap();
        let (_, cttt) = yukawa_series(&f, &qi(5)).unwrap();
        let n = instanton_numbers(&cttt, 5).unwrap();
        let expect: Vec<BigInt> = ["5", "2875", "609250", "317206375", "242467530000", "229305888887625"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(n, expect);
    }

    #[test]
    fn instantons_constant_and_bounds() {
        let c = TruncSeries::constant(qi(7), 5);
        assert_eq!(instanton_numbers(&c, 4).unwrap()[1..], vec![BigInt::from(0); 4][..]);
        assert!(matches!(instanton_numbers(&c, 5), Err(GeometryError::BeyondTruncation(5, 4))));
        let bad = TruncSeries::new(vec![qi(1), qi(1), qi(0)], 3);
        assert!(matches!(instanton_numbers(&bad, 2), Err(GeometryError::NonIntegral(2, _))));
    }

    #[test]
    fn positivity_and_metric() {
        let ch = chart();
        let p = ch.point_z(C64::new(1e-4, 0.0)).unwrap();
        let s = ch.sample(&p).unwrap();
        assert!(s.exp_mk.re > 0.0);
        assert!(s.g[(0, 0)].re > 0.0);
        assert!(s.g[(0, 0)].im.abs() < 1e-12);
        let (g, fd) = wp_metric_fd(&ch, p.t, 1e-3).unwrap();
        assert!(((g - fd) / g).abs() < 1e-6, "{g} {fd}");
    }

    #[test]
    fn newton_roundtrip() {
        let ch = chart();
        let p = ch.point_z(C64::new(1e-4, 2e-5)).unwrap();
        let q = ch.point_t(p.t).unwrap();
        assert!((q.z - p.z).norm() < 1e-16);
    }

    #[test]
    fn curvature_identity_quintic() {
        let ch = chart();
        let t = ch.t_of_z(C64::new(1e-4, 0.0));
        let r1 = curvature_check(&ch, t, 1e-3).unwrap();
        let r2 = curvature_check(&ch, t, 5e-4).unwrap();
        assert!(r1.residual < 1e-4, "{r1:?}");
        let slope = (r1.residual / r2.residual).log2();
        assert!((1.8..=2.2).contains(&slope), "slope {slope} {r1:?} {r2:?}");
        assert!(((r1.lhs_analytic - r1.rhs) / r1.rhs).abs() < 1e-9, "{r1:?}");
    }
}
