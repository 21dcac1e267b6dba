//! Command-line front end: one report per subcommand, rendered as text or CSV.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a computation
//! breaks down, 2 on bad input.

use crate::anomaly::{
    master_operator, parallel_convergence, parallel_state_residual, z0_equivalence_check, MasterOperator, Z0Options, Z0Report,
    ZConvention,
};
use crate::connections::{flatness_convergence, torus_chsv_curvature, FlatnessReport};
use crate::hodge_frame::{
    abelian_period_matrix, dj_convergence, frame_from_periods, lattice_transport, polarizing_j, quintic_integral_lattice,
    rational_plane_near, torus_dj, torus_frame, SymplecticSpace, TorusDj,
};
use crate::kuranishi::{mc_residual, residual_is_zero, solve_maurer_cartan};
use crate::model::{parse_model, Fixture, Model, PeriodsModel};
use crate::picard_fuchs::{frobenius_basis, local_torelli_rank, mirror_map};
use crate::quantization::{
    bogoliubov_image, square_loop_report, state_norm, transport, CMat, CVec, GaussianState, GeneratorSign, Polarization,
};
use crate::report::{c, f, gq, poly, q, Format, Report};
use crate::scalar::{q_to_f64, Gq, Scalar, C64};
use crate::special_geometry::{bigint_to_string, curvature_check, instanton_numbers, yukawa_series, SpecialChart};
use crate::torus::{TorusGeometry, N};
use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::Signed;
use std::ffi::OsString;
use std::fmt::Display;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Periods,
    MirrorMap,
    Yukawa,
    Instantons,
    WpCurvature,
    DjCheck,
    ChsvFlatness,
    QuantizeTransport,
    Holonomy,
    MasterCheck,
    #[value(name = "z0-check")]
    Z0Check,
    McSolve,
    LatticeTransport,
    RationalPlane,
    AbelianMap,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Parser)]
#[command(name = "cymoduli", version, about = "Periods, special geometry, flat connections and quantization on moduli spaces")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Series truncation order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Integration steps per path segment.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Phase θ of the spectral parameter t = e^{iθ}.
    #[arg(long = "t-phase", allow_negative_numbers = true)]
    pub t_phase: Option<f64>,
    /// Order in λ to which the master equation is checked.
    #[arg(long = "lambda-order")]
    pub lambda_order: Option<usize>,
    #[arg(long, default_value = "text")]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Compute(String),
}

fn comp<E: Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

type Res<T> = Result<T, CliError>;

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome { code: 0, stdout: text, stderr: String::new() },
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let path = args.model.display().to_string();
    let fail = |code: i32, msg: String| Outcome { code, stdout: String::new(), stderr: format!("error: {msg}\n") };
    let src = match std::fs::read_to_string(&args.model) {
        Ok(s) => s,
        Err(e) => return fail(2, format!("{path}: {e}")),
    };
    let model = match parse_model(&src) {
        Ok(m) => m,
        Err(e) => return fail(2, format!("{path}:{e}")),
    };
    match execute(&args, &model) {
        Ok(r) => Outcome { code: if r.passed() { 0 } else { 1 }, stdout: r.render(args.format), stderr: String::new() },
        Err(CliError::Input(m)) => fail(2, m),
        Err(CliError::Compute(m)) => fail(1, m),
    }
}

fn execute(args: &Args, model: &Model) -> Res<Report> {
    if let Some(h) = args.step {
        if !(h.is_finite() && h > 0.0) {
            return Err(input(format!("--step must be positive, got {h}")));
        }
    }
    if args.steps == Some(0) {
        return Err(input("--steps must be at least 1"));
    }
    if let Some(p) = args.t_phase {
        if !p.is_finite() {
            return Err(input("--t-phase must be finite"));
        }
    }
    let mut r = Report::new(&args.command.name());
    r.entry("model", model.name.clone());
    let torus = model.fixture == Fixture::Torus;
    match (args.command, torus) {
        (Command::Periods, false) => periods(args, model, &mut r)?,
        (Command::Periods, true) => torus_periods(&mut r)?,
        (Command::MirrorMap, false) => mirror(args, model, &mut r)?,
        (Command::Yukawa, false) => yukawa(args, model, &mut r)?,
        (Command::Yukawa, true) => torus_yukawa(&mut r),
        (Command::Instantons, false) => instantons(args, model, &mut r)?,
        (Command::WpCurvature, false) => wp_curvature(args, model, &mut r)?,
        (Command::WpCurvature, true) => torus_wp_curvature(&mut r),
        (Command::DjCheck, false) => dj(args, model, &mut r)?,
        (Command::DjCheck, true) => torus_dj_report(&mut r),
        (Command::ChsvFlatness, false) => chsv(args, model, &mut r)?,
        (Command::ChsvFlatness, true) => torus_chsv(&mut r),
        (Command::QuantizeTransport, _) => quantize_transport(args, model, &mut r)?,
        (Command::Holonomy, _) => holonomy(args, model, &mut r)?,
        (Command::MasterCheck, false) => master_check(args, model, &mut r)?,
        (Command::MasterCheck, true) => torus_master(&mut r)?,
        (Command::Z0Check, _) => z0(args, model, &mut r)?,
        (Command::McSolve, _) => mc_solve(args, model, &mut r)?,
        (Command::LatticeTransport, false) => lattice(args, model, &mut r)?,
        (Command::RationalPlane, _) => rational_plane(args, model, &mut r)?,
        (Command::AbelianMap, false) => abelian(args, model, &mut r)?,
        (cmd, true) => return Err(input(format!("{} needs a Picard-Fuchs model; the torus fixture has no such data", cmd.name()))),
    }
    Ok(r)
}

struct Pf<'a> {
    periods: &'a PeriodsModel,
    chart: SpecialChart,
    t0: C64,
}

fn periods_of(model: &Model) -> Res<&PeriodsModel> {
    model.periods.as_ref().ok_or_else(|| input("the model has no [periods] table"))
}

fn pf<'a>(model: &'a Model, order: Option<usize>) -> Res<Pf<'a>> {
    let p = periods_of(model)?;
    let order = order.unwrap_or(p.order);
    if order < 4 {
        return Err(input(format!("--order must be at least 4, got {order}")));
    }
    let frame = frobenius_basis(&p.operator, order, p.basis_change.clone()).map_err(comp)?;
    let chart = SpecialChart::new(frame, p.kappa.clone(), p.radius).map_err(comp)?;
    let t0 = chart.t_of_z(p.base_z);
    Ok(Pf { periods: p, chart, t0 })
}

fn window(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn periods(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let frame = &ctx.chart.frame;
    let shown = frame.trunc_order.min(6);
    r.entry("order", frame.trunc_order.to_string());
    r.entry("kappa", q(&ctx.periods.kappa));
    r.entry("base_z", c(ctx.periods.base_z));
    let rank = local_torelli_rank(frame, ctx.periods.base_z, ctx.periods.radius).map_err(comp)?;
    r.entry("local_torelli_rank", rank.to_string());
    let t = r.table("solutions", &["solution", "log_power", "k", "coefficient"]);
    for (a, s) in frame.solutions.iter().enumerate() {
        for (p, b) in s.blocks().iter().enumerate() {
            for k in 0..shown {
                t.row(vec![a.to_string(), p.to_string(), k.to_string(), q(&b.coeff(k))]);
            }
        }
    }
    let n = frame.pairing.rows;
    let cols: Vec<String> = (0..n).map(|j| format!("q{j}")).collect();
    let colrefs: Vec<&str> = std::iter::once("row").chain(cols.iter().map(String::as_str)).collect();
    let t = r.table("pairing", &colrefs);
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend((0..n).map(|j| q(&frame.pairing[(i, j)])));
        t.row(row);
    }
    let annihilated = match &frame.op {
        Some(op) => frame.solutions.iter().all(|s| op.apply(s).map(|x| x.is_zero()).unwrap_or(false)),
        None => true,
    };
    r.check("annihilated", annihilated, "operator applied to each solution");
    let antisym = (0..n).all(|i| (0..n).all(|j| frame.pairing[(i, j)] == -frame.pairing[(j, i)].clone()));
    r.check("pairing_antisymmetric", antisym, "");
    r.check("pairing_nondegenerate", !frame.pairing.det().is_zero(), format!("det = {}", q(&frame.pairing.det())));
    Ok(())
}

fn torus_periods(r: &mut Report) -> Res<()> {
    let geom = TorusGeometry::new();
    r.entry("exp_minus_k", q(&geom.exp_mk0));
    let frame = torus_frame(&geom).map_err(comp)?;
    let (p, m, z) = frame.signature();
    r.entry("gmetric_signature", format!("({p},{m},{z})"));
    let t = r.table("omega", &["derivative", "basis", "value"]);
    let mut add = |label: String, v: Vec<Gq>| {
        for (b, x) in v.iter().enumerate() {
            if !x.is_zero() {
                t.row(vec![label.clone(), b.to_string(), gq(x)]);
            }
        }
    };
    add("-".to_string(), geom.d_omega(&[]));
    for i in 0..N {
        add(format!("d{i}"), geom.d_omega(&[i]));
    }
    r.check("exp_minus_k_eq_8", geom.exp_mk0 == crate::scalar::qi(8), "");
    r.check("frame_identities", frame.check(0.0).is_ok(), "exact");
    Ok(())
}

fn mirror(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let (qz, zq) = mirror_map(&ctx.chart.frame).map_err(comp)?;
    let shown = qz.order().min(8);
    r.entry("order", qz.order().to_string());
    let t = r.table("mirror_map", &["k", "q_of_z", "z_of_q"]);
    for k in 0..shown {
        t.row(vec![k.to_string(), q(&qz.coeff(k)), q(&zq.coeff(k))]);
    }
    r.check("leading_q", qz.coeff(0).is_zero() && qz.coeff(1) == crate::scalar::qi(1), "q = z + O(z^2)");
    r.check("leading_z", zq.coeff(0).is_zero() && zq.coeff(1) == crate::scalar::qi(1), "z = q + O(q^2)");
    Ok(())
}

fn yukawa(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let (czzz, cttt) = yukawa_series(&ctx.chart.frame, &ctx.periods.kappa).map_err(comp)?;
    let shown = cttt.order().min(8);
    r.entry("kappa", q(&ctx.periods.kappa));
    let t = r.table("yukawa", &["k", "czzz", "cttt"]);
    for k in 0..shown {
        t.row(vec![k.to_string(), q(&czzz.coeff(k)), q(&cttt.coeff(k))]);
    }
    r.check("classical_term", cttt.coeff(0) == ctx.periods.kappa, "cttt(0) = kappa");
    Ok(())
}

fn torus_yukawa(r: &mut Report) {
    let geom = TorusGeometry::new();
    let y = geom.yukawa();
    let t = r.table("yukawa", &["i", "j", "k", "value"]);
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let v = y.get(i, j, k);
                if !v.is_zero() {
                    t.row(vec![i.to_string(), j.to_string(), k.to_string(), gq(v)]);
                }
            }
        }
    }
    r.check("symmetric", y.is_symmetric(), "exact");
}

fn instantons(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, Some(args.order.unwrap_or(15)))?;
    let (_, cttt) = yukawa_series(&ctx.chart.frame, &ctx.periods.kappa).map_err(comp)?;
    let d_max = cttt.order().saturating_sub(1);
    let ns = instanton_numbers(&cttt, d_max);
    r.entry("d_max", d_max.to_string());
    match ns {
        Ok(ns) => {
            let t = r.table("instantons", &["d", "n_d"]);
            for (d, n) in ns.iter().enumerate().skip(1) {
                t.row(vec![d.to_string(), bigint_to_string(n)]);
            }
            r.check("integral", true, "every n_d is an integer");
        }
        Err(e) => r.check("integral", false, e.to_string()),
    }
    Ok(())
}

fn wp_curvature(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let tol = &model.tolerances;
    let h = args.step.unwrap_or(1e-3);
    let r1 = curvature_check(&ctx.chart, ctx.t0, h).map_err(comp)?;
    let r2 = curvature_check(&ctx.chart, ctx.t0, h / 2.0).map_err(comp)?;
    let slope = (r1.residual / r2.residual).log2();
    r.entry("t0", c(ctx.t0));
    r.entry("slope", f(slope));
    let t = r.table("curvature", &["h", "lhs_fd", "lhs_analytic", "rhs", "residual"]);
    for x in [&r1, &r2] {
        t.row(vec![f(x.h), f(x.lhs_fd), f(x.lhs_analytic), f(x.rhs), f(x.residual)]);
    }
    r.check("residual", r1.residual <= tol.residual, format!("{} <= {}", f(r1.residual), f(tol.residual)));
    r.check("slope", window(slope, tol.slope_low, tol.slope_high), format!("{} in [{}, {}]", f(slope), tol.slope_low, tol.slope_high));
    Ok(())
}

fn split4(idx: usize) -> [usize; 4] {
    [idx / (N * N * N), (idx / (N * N)) % N, (idx / N) % N, idx % N]
}

fn torus_wp_curvature(r: &mut Report) {
    let geom = TorusGeometry::new();
    let (lhs, rhs) = geom.curvature_sides();
    let t = r.table("curvature", &["i", "j", "k", "l", "lhs", "rhs"]);
    for (idx, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
        if !a.is_zero() || !b.is_zero() {
            let [i, j, k, l] = split4(idx);
            t.row(vec![i.to_string(), j.to_string(), k.to_string(), l.to_string(), gq(a), gq(b)]);
        }
    }
    r.check("exact_equality", lhs == rhs, "all components");
}

fn dj(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let tol = &model.tolerances;
    let h = args.step.unwrap_or(1e-3);
    let conv = dj_convergence(&ctx.chart, ctx.t0, h).map_err(comp)?;
    r.entry("t0", c(ctx.t0));
    r.entry("slope", f(conv.slope));
    r.entry("extrapolated", c(conv.extrapolated));
    let t = r.table("dj", &["h", "measured", "formula", "formula_alt", "ratio", "residual", "residual_alt", "corrected_residual"]);
    for x in &conv.reports {
        t.row(vec![
            f(x.h),
            c(x.measured),
            c(x.wit12),
            c(x.wit15),
            c(x.ratio),
            f(x.residual12),
            f(x.residual15),
            f(x.corrected_residual),
        ]);
    }
    let x = &conv.reports[0];
    r.check("literal", x.residual12 <= tol.residual, format!("{} <= {}", f(x.residual12), f(tol.residual)));
    r.check("literal_alt", x.residual15 <= tol.residual, format!("{} <= {}", f(x.residual15), f(tol.residual)));
    r.check("corrected", x.corrected_residual <= tol.residual, format!("measured = {} * formula", c(x.ratio)));
    r.check("slope", window(conv.slope, tol.slope_low, tol.slope_high), f(conv.slope));
    Ok(())
}

fn torus_dj_report(r: &mut Report) {
    let geom = TorusGeometry::new();
    let d: TorusDj = torus_dj(&geom);
    r.entry("ratio", d.ratio.as_ref().map(gq).unwrap_or_else(|| "none".to_string()));
    let t = r.table("dj", &["i", "j", "l", "measured", "formula", "formula_alt"]);
    for i in 0..N {
        for j in 0..N {
            for l in 0..N {
                let (m, a, b) = (TorusDj::get(&d.measured, i, j, l), TorusDj::get(&d.wit12, i, j, l), TorusDj::get(&d.wit15, i, j, l));
                if !m.is_zero() || !a.is_zero() || !b.is_zero() {
                    t.row(vec![i.to_string(), j.to_string(), l.to_string(), gq(m), gq(a), gq(b)]);
                }
            }
        }
    }
    r.check("literal", d.measured == d.wit12, "exact");
    r.check("literal_alt", d.measured == d.wit15, "exact");
    let corrected = d.ratio.as_ref().map(|k| d.wit12.iter().zip(&d.measured).all(|(w, m)| &k.times(w) == m)).unwrap_or(false);
    r.check("corrected", corrected, "measured = ratio * formula");
}

fn phases(args: &Args) -> Vec<C64> {
    match args.t_phase {
        Some(p) => vec![C64::from_polar(1.0, p)],
        None => vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
    }
}

fn chsv(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let tol = &model.tolerances;
    let h = args.step.unwrap_or(1e-3);
    let mut rows: Vec<(FlatnessReport, FlatnessReport, f64)> = Vec::new();
    for t in phases(args) {
        rows.push(flatness_convergence(&ctx.chart, ctx.t0, h, t).map_err(comp)?);
    }
    r.entry("t0", c(ctx.t0));
    let t = r.table("flatness", &["t", "h", "dd", "d_dbar", "dbar_dbar", "omega_parallel", "transversality"]);
    for (a, b, _) in &rows {
        for x in [a, b] {
            t.row(vec![c(x.t), f(x.h), f(x.blocks[0]), f(x.blocks[1]), f(x.blocks[2]), f(x.omega_parallel), f(x.transversality)]);
        }
    }
    let t = r.table("slopes", &["t", "slope"]);
    for (a, _, s) in &rows {
        t.row(vec![c(a.t), f(*s)]);
    }
    let worst = rows.iter().map(|(a, _, _)| a.blocks.iter().fold(0.0f64, |m, x| m.max(*x))).fold(0.0, f64::max);
    let omega = rows.iter().map(|(a, _, _)| a.omega_parallel).fold(0.0, f64::max);
    r.check("curvature", worst <= tol.residual, format!("{} <= {}", f(worst), f(tol.residual)));
    r.check("omega_parallel", omega <= tol.residual, f(omega));
    r.check(
        "slope",
        rows.iter().all(|(_, _, s)| window(*s, tol.slope_low, tol.slope_high)),
        format!("window [{}, {}]", tol.slope_low, tol.slope_high),
    );
    Ok(())
}

fn torus_chsv(r: &mut Report) {
    let geom = TorusGeometry::new();
    let fl = torus_chsv_curvature(&geom);
    r.entry("nonzero_connection_entries", fl.nonzero_entries.to_string());
    let t = r.table("flatness", &["block", "t_power", "value"]);
    for (name, p, ok) in &fl.blocks {
        t.row(vec![name.clone(), p.to_string(), if *ok { "0".to_string() } else { "nonzero".to_string() }]);
    }
    r.check("flat", fl.all_zero, "exact, every power of t");
    r.check("transversality", fl.transversality, "exact");
}

fn quant_model(model: &Model) -> Res<&crate::model::QuantModel> {
    model.quantization.as_ref().ok_or_else(|| input("the model has no [quantization] table"))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

fn quantize_transport(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let qm = quant_model(model)?;
    let tol = &model.tolerances;
    let steps = args.steps.unwrap_or(1000);
    let path = &qm.path;
    let n = path[0].nrows();
    let start = Polarization::from_siegel(&path[0]).map_err(comp)?;
    let vac = GaussianState::vacuum(n).to_full(&start).map_err(comp)?;
    let out = transport(&vac, path, steps, GeneratorSign::Holomorphic).map_err(comp)?;
    let want = bogoliubov_image(&vac, &out.end).map_err(comp)?;
    let mismatch = max_abs(&(&out.state.a - &want));
    let n0 = state_norm(&vac, &start.omega).map_err(comp)?;
    let n1 = state_norm(&out.state, &start.omega).map_err(comp)?;
    let literal = transport(&vac, path, steps, GeneratorSign::Literal).map(|x| f(x.holomorphy_residual)).unwrap_or_else(|e| e.to_string());
    r.entry("n", n.to_string());
    r.entry("steps", steps.to_string());
    r.entry("holomorphy_residual", f(out.holomorphy_residual));
    r.entry("holomorphy_residual_opposite_sign", literal);
    r.entry("bogoliubov_mismatch", f(mismatch));
    r.entry("norm_ratio", f(n1 / n0));
    let end = GaussianState::from_full(&out.state, &out.end).map_err(comp)?;
    let t = r.table("end_state", &["i", "j", "q"]);
    for i in 0..n {
        for j in 0..n {
            t.row(vec![i.to_string(), j.to_string(), c(end.q[(i, j)])]);
        }
    }
    r.check("holomorphy", out.holomorphy_residual <= tol.holomorphy, format!("{} <= {}", f(out.holomorphy_residual), f(tol.holomorphy)));
    r.check("bogoliubov", mismatch <= tol.holomorphy, f(mismatch));
    r.check("unitary", (n1 / n0 - 1.0).abs() <= tol.holomorphy, "");
    Ok(())
}

fn holonomy(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let qm = quant_model(model)?;
    let tol = &model.tolerances;
    let steps = args.steps.unwrap_or(1000);
    let rep = square_loop_report(&qm.base, &qm.x, &qm.y, qm.side, steps, GeneratorSign::Holomorphic).map_err(comp)?;
    r.entry("side", f(qm.side));
    r.entry("steps", steps.to_string());
    r.entry("scalar", c(rep.holonomy.scalar));
    r.entry("log_scalar", c(rep.holonomy.log_scalar));
    r.entry("curvature_integral", c(rep.curvature_integral));
    r.entry("ratio", c(rep.constant_ratio));
    r.check(
        "scalar_holonomy",
        rep.holonomy.deviation <= tol.holonomy_deviation,
        format!("{} <= {}", f(rep.holonomy.deviation), f(tol.holonomy_deviation)),
    );
    r.check("curvature_match", rep.mismatch <= tol.curvature_match, format!("{} <= {}", f(rep.mismatch), f(tol.curvature_match)));
    Ok(())
}

fn operator_table<S: Scalar>(r: &mut Report, op: &MasterOperator<S>, render: impl Fn(&S) -> String) {
    let t = r.table("coefficient", &["a", "i", "j", "value"]);
    for (a, m) in op.coeff.iter().enumerate() {
        for i in 0..m.rows {
            for j in 0..m.cols {
                if !m[(i, j)].is_zero() {
                    t.row(vec![a.to_string(), i.to_string(), j.to_string(), render(&m[(i, j)])]);
                }
            }
        }
    }
}

fn master_check(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let tol = &model.tolerances;
    let lambda_order = args.lambda_order.unwrap_or(2);
    let steps = args.steps.unwrap_or(1000);
    let p = ctx.chart.point_t(ctx.t0).map_err(comp)?;
    let s = ctx.chart.sample(&p).map_err(comp)?;
    let op = master_operator(&s).map_err(comp)?;
    let offsets = model.anomaly.as_ref().map(|a| a.path.clone()).unwrap_or_else(|| vec![C64::new(0.0, 0.0), C64::new(0.02, 0.01)]);
    let path: Vec<C64> = offsets.iter().map(|o| ctx.t0 + o).collect();
    let length: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let size = op.coeff[0][(0, 0)].norm();
    let lambda = match model.anomaly.as_ref().and_then(|a| a.lambda) {
        Some(l) => l,
        None => (0.5 / (size * length).max(f64::MIN_POSITIVE)).sqrt(),
    };
    let state = GaussianState {
        q: CMat::from_element(1, 1, C64::new(0.3, 0.2)),
        l: CVec::from_element(1, C64::new(0.5, -0.1)),
        s: C64::new(0.0, 0.0),
    };
    r.entry("t0", c(ctx.t0));
    r.entry("e2k", c(op.e2k));
    r.entry("lambda", f(lambda));
    r.entry("lambda_order", lambda_order.to_string());
    r.entry("weight_residual", f(op.weight_residual));
    operator_table(r, &op, |x| c(*x));
    let fin = parallel_state_residual(&ctx.chart, &path, &state, steps, lambda, lambda_order).map_err(comp)?;
    r.entry("steps", steps.to_string());
    r.entry("master_residual", f(fin.master_residual));
    r.entry("antiholomorphy_residual", f(fin.antiholomorphy_residual));
    let scale = size.max(f64::MIN_POSITIVE);
    r.check("symmetric", op.asymmetry <= 1e-12 * scale, f(op.asymmetry));
    r.check("kahler_weight", op.weight_residual <= 1e-12 * scale, f(op.weight_residual));
    r.check("master_residual", fin.master_residual <= tol.parallel, format!("{} <= {}", f(fin.master_residual), f(tol.parallel)));
    r.check("antiholomorphy", fin.antiholomorphy_residual <= tol.parallel, f(fin.antiholomorphy_residual));
    if lambda_order >= 2 {
        let conv = parallel_convergence(&ctx.chart, &path, &state, &[4, 8, 16, 32], lambda).map_err(comp)?;
        let t = r.table("convergence", &["steps", "master_residual", "antiholomorphy_residual"]);
        for x in &conv.reports {
            t.row(vec![x.steps.to_string(), f(x.master_residual), f(x.antiholomorphy_residual)]);
        }
        r.entry("slope", f(conv.slope));
        r.check("slope", (conv.slope - 4.0).abs() <= tol.parallel_slope, format!("{} vs 4", f(conv.slope)));
    }
    Ok(())
}

fn torus_master(r: &mut Report) -> Res<()> {
    let geom = TorusGeometry::new();
    let op = master_operator(&geom.sample()).map_err(comp)?;
    r.entry("e2k", gq(&op.e2k));
    operator_table(r, &op, gq);
    r.check("symmetric", op.asymmetry == 0.0, "exact");
    r.check("kahler_weight", op.weight_residual == 0.0, "exact");
    r.check("e2k", op.e2k == Gq::real(crate::scalar::q(1, 64)), "e^{2K} = 1/64");
    Ok(())
}

fn z0_table(r: &mut Report, z: &Z0Report) {
    let name = format!("z0_{}", z.options.convention.name());
    let t = r.table(&name, &["lambda_power", "per_genus", "linear", "predicted", "discrepancy", "cross_terms", "bcov_form"]);
    for m in 0..z.g_max {
        t.row(vec![
            (2 * m).to_string(),
            poly(&z.per_genus[m]),
            poly(&z.linear[m]),
            poly(&z.predicted[m]),
            poly(&z.discrepancy[m]),
            poly(&z.cross_terms[m]),
            poly(&z.bcov_form[m]),
        ]);
    }
}

fn z0(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let am = model.anomaly.as_ref().ok_or_else(|| input("the model has no [anomaly] table"))?;
    let available = 2 * (am.g_max - 1);
    let order = args.lambda_order.unwrap_or(available);
    if order % 2 == 1 {
        return Err(input(format!("--lambda-order must be even, got {order}")));
    }
    if order > available {
        return Err(input(format!("--lambda-order {order} needs genus {}; the model carries genus {}", order / 2 + 1, am.g_max)));
    }
    let g = order / 2 + 1;
    r.entry("lambda_order", order.to_string());
    r.entry("genus", g.to_string());
    r.entry("derivative", format!("{:?}", am.derivative).to_lowercase());
    let t = r.table("free_energies", &["genus", "f"]);
    for k in 1..=g {
        t.row(vec![k.to_string(), poly(am.family.genus(k))]);
    }
    let mut reports = Vec::new();
    for conv in [ZConvention::Witten, ZConvention::Bcov] {
        let opts = Z0Options { convention: conv, derivative: am.derivative };
        let z = z0_equivalence_check(&am.family, &am.sample, g, opts).map_err(comp)?;
        z0_table(r, &z);
        reports.push(z);
    }
    let (w, b) = (&reports[0], &reports[1]);
    r.entry("f1_term", poly(&w.f1_term));
    r.check("genus_recursion", w.per_genus_zero(), "per-genus residual vanishes");
    r.check("series_vs_recursion_witten", w.discrepancy_zero(), "exact");
    r.check("series_vs_recursion_bcov", b.discrepancy_zero(), "exact");
    r.check("z0_witten", w.only_f1_term(), "linear residual is the F_1 term only");
    Ok(())
}

fn mc_solve(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let spec = model.dgla.as_ref().ok_or_else(|| input("the model has no [dgla] table"))?;
    let dg = spec.build(args.seed);
    dg.validate().map_err(|e| input(e.to_string()))?;
    let dirs = spec.directions.clone().unwrap_or_else(|| dg.harmonic_basis());
    let order = args.order.map(|o| o as u32).unwrap_or(spec.order);
    if order == 0 {
        return Err(input("--order must be at least 1"));
    }
    let phi = solve_maurer_cartan(&dg, &dirs, order).map_err(comp)?;
    let res = mc_residual(&dg, &phi);
    r.entry("dims", format!("{:?}", dg.dims));
    r.entry("directions", dirs.len().to_string());
    r.entry("order", order.to_string());
    r.entry("terms", phi.terms.len().to_string());
    let t = r.table("beltrami", &["index", "degree", "coefficients"]);
    for (idx, v) in phi.terms.iter().filter(|(i, _)| i.degree() <= 2) {
        let cs: Vec<String> = v.iter().map(q).collect();
        t.row(vec![idx.to_string(), idx.degree().to_string(), cs.join(" ")]);
    }
    r.check("maurer_cartan", residual_is_zero(&res), format!("exact through order {order}"));
    Ok(())
}

fn lattice(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let tol = &model.tolerances;
    let (offsets, default_steps) = match &model.lattice {
        Some(l) => (l.path.clone(), l.steps),
        None => (vec![C64::new(0.0, 0.0), C64::new(0.05, 0.0), C64::new(0.05, 0.05)], 20),
    };
    let steps = args.steps.unwrap_or(default_steps);
    let path: Vec<C64> = offsets.iter().map(|o| ctx.t0 + o).collect();
    let phase = C64::from_polar(1.0, args.t_phase.unwrap_or(std::f64::consts::FRAC_PI_2));
    let lat = quintic_integral_lattice(&ctx.chart).map_err(comp)?;
    let moved = lattice_transport(&ctx.chart, &lat, &path, phase, steps).map_err(comp)?;
    r.entry("t_phase", c(phase));
    r.entry("steps", steps.to_string());
    r.entry("det_gram", q(&lat.det_gram()));
    r.entry("end", c(moved.end));
    r.entry("gram_deviation", f(moved.gram_deviation));
    r.entry("imag_part", f(moved.imag_part));
    let n = moved.basis.rows;
    let cols: Vec<String> = (0..n).map(|j| format!("e{j}")).collect();
    let colrefs: Vec<&str> = std::iter::once("row").chain(cols.iter().map(String::as_str)).collect();
    let t = r.table("transported_basis", &colrefs);
    for i in 0..n {
        let mut row = vec![i.to_string()];
        row.extend((0..moved.basis.cols).map(|j| c(moved.basis[(i, j)])));
        t.row(row);
    }
    r.check("unimodular", lat.det_gram().abs() == crate::scalar::qi(1), "");
    r.check("gram_preserved", moved.gram == lat.gram, "");
    r.check("real", moved.imag_part <= tol.lattice_imag, format!("{} <= {}", f(moved.imag_part), f(tol.lattice_imag)));
    Ok(())
}

fn rational_plane(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let (pairs, target, bounds) = match &model.plane {
        Some(p) => (p.pairs, p.target.clone(), p.bounds.clone()),
        None => (2, None, vec![2, 4, 8, 16, 32]),
    };
    let space = SymplecticSpace::standard(pairs);
    let dim = 2 * pairs;
    let (u, mut v) = match target {
        Some(t) => t,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut draw = || (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
            (draw(), draw())
        }
    };
    let om: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| q_to_f64(&space.omega[(i, j)])).collect()).collect();
    let w: f64 = (0..dim).map(|i| (0..dim).map(|j| u[i] * om[i][j] * v[j]).sum::<f64>()).sum();
    if w < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    r.entry("pairs", pairs.to_string());
    r.entry("u", u.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" "));
    r.entry("v", v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" "));
    let mut found = Vec::new();
    for &b in &bounds {
        let p = rational_plane_near(&space, &u, &v, b).map_err(comp)?;
        found.push(p);
    }
    let t = r.table("planes", &["bound", "distance", "pairing", "gamma", "mu"]);
    for p in &found {
        let g: Vec<String> = p.gamma.iter().map(q).collect();
        let m: Vec<String> = p.mu.iter().map(q).collect();
        t.row(vec![p.bound.to_string(), f(p.distance), q(&p.pairing), g.join(" "), m.join(" ")]);
    }
    let mono = found.windows(2).all(|w| w[1].distance <= w[0].distance);
    r.check("monotone", mono, "distance nonincreasing in the bound");
    r.check("positive", found.iter().all(|p| p.pairing > crate::scalar::qi(0)), "pairing of the plane basis");
    Ok(())
}

fn abelian(args: &Args, model: &Model, r: &mut Report) -> Res<()> {
    let ctx = pf(model, args.order)?;
    let lat = quintic_integral_lattice(&ctx.chart).map_err(comp)?;
    let frame = frame_from_periods(&ctx.chart, ctx.t0).map_err(comp)?;
    let s = abelian_period_matrix(&lat.basis.to_c64(), &polarizing_j(&frame), &ctx.chart.sigma).map_err(comp)?;
    r.entry("t0", c(ctx.t0));
    r.entry("asymmetry", f(s.asymmetry));
    r.entry("im_min_eigenvalue", f(s.im_min_eigenvalue));
    let n = s.z.rows;
    let t = r.table("siegel", &["i", "j", "z"]);
    for i in 0..n {
        for j in 0..s.z.cols {
            t.row(vec![i.to_string(), j.to_string(), c(s.z[(i, j)])]);
        }
    }
    r.check("symmetric", s.asymmetry <= 1e-8, f(s.asymmetry));
    r.check("positive_imaginary_part", s.im_min_eigenvalue > 0.0, f(s.im_min_eigenvalue));
    Ok(())
}
