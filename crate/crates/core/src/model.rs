//! Model files: TOML with every key validated and errors located by line and column.

use crate::anomaly::{CovariantDerivative, FreeEnergyFamily, ToySample, DEGREE_CAP};
use crate::kuranishi::{random_model, torus_model, DGLAModel};
use crate::linalg::Mat;
use crate::picard_fuchs::PFOperator;
use crate::poly::Poly;
use crate::quantization::CMat;
use crate::scalar::{parse_c64, parse_q, Gq, Scalar, C64, Q};
use serde::Deserialize;
use std::fmt;
use std::ops::Range;
use toml::Spanned;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ModelError {}

fn locate(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map(|s| s.chars().count()).unwrap_or(0) + 1;
    (line, column)
}

fn err_at(src: &str, span: Range<usize>, message: impl Into<String>) -> ModelError {
    let (line, column) = locate(src, span.start);
    ModelError { line, column, message: message.into() }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: Spanned<String>,
    fixture: Option<Spanned<String>>,
    periods: Option<RawPeriods>,
    dgla: Option<RawDgla>,
    quantization: Option<RawQuant>,
    anomaly: Option<RawAnomaly>,
    lattice: Option<RawLattice>,
    plane: Option<RawPlane>,
    tolerances: Option<Spanned<Tolerances>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPeriods {
    operator: Spanned<Vec<Spanned<String>>>,
    order: Spanned<i64>,
    radius: Spanned<f64>,
    kappa: Spanned<String>,
    base_z: Spanned<String>,
    basis_change: Option<Spanned<Vec<Vec<i64>>>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawTriple {
    i: usize,
    j: usize,
    k: usize,
    c: Spanned<String>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawDgla {
    builtin: Option<Spanned<String>>,
    seed: Option<u64>,
    dims: Option<Spanned<Vec<usize>>>,
    dbar: Option<Vec<Vec<Vec<Spanned<String>>>>>,
    bracket: Option<Vec<RawTriple>>,
    directions: Option<Vec<Vec<Spanned<String>>>>,
    order: Option<Spanned<i64>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawQuant {
    base: Spanned<Vec<Vec<Spanned<String>>>>,
    x: Spanned<Vec<Vec<Spanned<String>>>>,
    y: Spanned<Vec<Vec<Spanned<String>>>>,
    side: Spanned<f64>,
    path: Spanned<Vec<Spanned<Vec<Vec<Spanned<String>>>>>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    t: u8,
    tb: u8,
    c: Spanned<String>,
    ci: Option<Spanned<String>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawAnomaly {
    builtin: Option<Spanned<String>>,
    derivative: Option<Spanned<String>>,
    g_max: Spanned<i64>,
    cbar: Option<Vec<RawTerm>>,
    e2k: Option<Spanned<String>>,
    ginv: Option<Spanned<String>>,
    dk: Option<Vec<RawTerm>>,
    f1: Option<Vec<RawTerm>>,
    holomorphic: Option<Vec<Vec<RawTerm>>>,
    family: Option<Vec<Vec<RawTerm>>>,
    path: Option<Spanned<Vec<Spanned<String>>>>,
    lambda: Option<Spanned<f64>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    path: Spanned<Vec<Spanned<String>>>,
    steps: Option<Spanned<i64>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawPlane {
    pairs: Spanned<i64>,
    u: Option<Spanned<Vec<f64>>>,
    v: Option<Spanned<Vec<f64>>>,
    bounds: Spanned<Vec<u64>>,
}

/// Thresholds used by the pass/fail checks.
#[derive(Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub residual: f64,
    pub slope_low: f64,
    pub slope_high: f64,
    pub holonomy_deviation: f64,
    pub curvature_match: f64,
    pub holomorphy: f64,
    pub parallel: f64,
    pub parallel_slope: f64,
    pub lattice_imag: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-4,
            slope_low: 1.8,
            slope_high: 2.2,
            holonomy_deviation: 1e-8,
            curvature_match: 1e-6,
            holomorphy: 1e-8,
            parallel: 1e-5,
            parallel_slope: 0.3,
            lattice_imag: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PeriodsModel {
    pub operator: PFOperator,
    pub order: usize,
    pub radius: f64,
    pub kappa: Q,
    pub base_z: C64,
    pub basis_change: Option<Mat<Q>>,
}

#[derive(Clone, Debug)]
pub enum DglaSource {
    Torus,
    Random(Option<u64>),
    Explicit(DGLAModel),
}

#[derive(Clone, Debug)]
pub struct DglaSpec {
    pub source: DglaSource,
    pub directions: Option<Vec<Vec<Q>>>,
    pub order: u32,
}

impl DglaSpec {
    pub fn build(&self, seed: u64) -> DGLAModel {
        match &self.source {
            DglaSource::Torus => torus_model(),
            DglaSource::Random(s) => random_model(s.unwrap_or(seed)),
            DglaSource::Explicit(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuantModel {
    pub base: CMat,
    pub x: CMat,
    pub y: CMat,
    pub side: f64,
    pub path: Vec<CMat>,
}

#[derive(Clone, Debug)]
pub struct AnomalyModel {
    pub sample: ToySample,
    pub family: FreeEnergyFamily,
    pub derivative: CovariantDerivative,
    pub g_max: usize,
    pub path: Vec<C64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LatticeModel {
    pub path: Vec<C64>,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct PlaneModel {
    pub pairs: usize,
    pub target: Option<(Vec<f64>, Vec<f64>)>,
    pub bounds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixture {
    PicardFuchs,
    Torus,
}

/// A validated model.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub fixture: Fixture,
    pub periods: Option<PeriodsModel>,
    pub dgla: Option<DglaSpec>,
    pub quantization: Option<QuantModel>,
    pub anomaly: Option<AnomalyModel>,
    pub lattice: Option<LatticeModel>,
    pub plane: Option<PlaneModel>,
    pub tolerances: Tolerances,
}

struct Ctx<'a> {
    src: &'a str,
}

impl<'a> Ctx<'a> {
    fn err<T>(&self, span: Range<usize>, msg: impl Into<String>) -> Result<T, ModelError> {
        Err(err_at(self.src, span, msg))
    }

    fn q(&self, s: &Spanned<String>) -> Result<Q, ModelError> {
        parse_q(s.get_ref().trim()).map_or_else(|| self.err(s.span(), format!("expected a rational \"p/q\", got {:?}", s.get_ref())), Ok)
    }

    fn c(&self, s: &Spanned<String>) -> Result<C64, ModelError> {
        parse_c64(s.get_ref().trim()).map_or_else(|| self.err(s.span(), format!("expected a complex \"(re,im)\", got {:?}", s.get_ref())), Ok)
    }

    fn positive_usize(&self, v: &Spanned<i64>, what: &str) -> Result<usize, ModelError> {
        if *v.get_ref() < 1 {
            return self.err(v.span(), format!("{what} must be a positive integer"));
        }
        Ok(*v.get_ref() as usize)
    }

    fn cmat(&self, rows: &Spanned<Vec<Vec<Spanned<String>>>>) -> Result<CMat, ModelError> {
        let r = rows.get_ref();
        let n = r.len();
        if n == 0 || r.iter().any(|row| row.len() != n) {
            return self.err(rows.span(), "expected a nonempty square matrix");
        }
        let mut m = CMat::zeros(n, n);
        for (i, row) in r.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = self.c(x)?;
            }
        }
        Ok(m)
    }

    fn poly(&self, terms: &[RawTerm]) -> Result<Poly, ModelError> {
        let mut p = Poly::zero(2, DEGREE_CAP);
        for t in terms {
            let re = self.q(&t.c)?;
            let im = match &t.ci {
                Some(s) => self.q(s)?,
                None => Q::from_integer(0.into()),
            };
            if t.t as u32 + t.tb as u32 > DEGREE_CAP / 4 {
                return self.err(t.c.span(), format!("monomial degree above {}", DEGREE_CAP / 4));
            }
            p = p.add(&Poly::monomial(2, DEGREE_CAP, vec![t.t, t.tb], Gq::new(re, im)));
        }
        Ok(p)
    }
}

/// Parses "1 - 3125z", "-120 z", "7/2*z^2" into coefficients of z^j.
pub fn parse_z_poly(s: &str) -> Result<Vec<Q>, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut out: Vec<Q> = Vec::new();
    for t in terms {
        let (sign, body) = match t.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, t.strip_prefix('+').unwrap_or(&t)),
        };
        let (coef, pow) = match body.find('z') {
            None => (body, 0usize),
            Some(k) => {
                let tail = &body[k + 1..];
                let pow = if tail.is_empty() {
                    1
                } else {
                    tail.strip_prefix('^').and_then(|p| p.parse::<usize>().ok()).ok_or_else(|| format!("bad power in term {t:?}"))?
                };
                (body[..k].trim_end_matches('*'), pow)
            }
        };
        let c = if coef.is_empty() { Some(Q::from_integer(1.into())) } else { parse_q(coef) };
        let c = c.ok_or_else(|| format!("bad coefficient in term {t:?}"))?;
        if out.len() <= pow {
            out.resize(pow + 1, Q::from_integer(0.into()));
        }
        out[pow] = &out[pow] + c * Q::from_integer(sign.into());
    }
    Ok(out)
}

pub fn parse_model(src: &str) -> Result<Model, ModelError> {
    let raw: RawModel = toml::from_str(src).map_err(|e| {
        let (line, column) = e.span().map(|s| locate(src, s.start)).unwrap_or((1, 1));
        ModelError { line, column, message: e.message().to_string() }
    })?;
    let cx = Ctx { src };
    let fixture = match &raw.fixture {
        None => Fixture::PicardFuchs,
        Some(f) if f.get_ref() == "torus" => Fixture::Torus,
        Some(f) if f.get_ref() == "picard-fuchs" => Fixture::PicardFuchs,
        Some(f) => return cx.err(f.span(), format!("unknown fixture {:?}; expected \"torus\" or \"picard-fuchs\"", f.get_ref())),
    };
    if fixture == Fixture::PicardFuchs && raw.periods.is_none() {
        return cx.err(raw.name.span(), "a Picard-Fuchs model needs a [periods] table");
    }

    let periods = match &raw.periods {
        None => None,
        Some(p) => {
            let ops = p.operator.get_ref();
            if ops.len() != 5 {
                return cx.err(p.operator.span(), format!("operator needs 5 coefficients p_0..p_4, got {}", ops.len()));
            }
            let mut coeffs = Vec::new();
            for o in ops {
                coeffs.push(parse_z_poly(o.get_ref()).or_else(|m| cx.err(o.span(), m))?);
            }
            let operator = PFOperator::new(coeffs).or_else(|e| cx.err(p.operator.span(), e.to_string()))?;
            let order = cx.positive_usize(&p.order, "order")?;
            if order < 4 {
                return cx.err(p.order.span(), "order must be at least 4");
            }
            let radius = *p.radius.get_ref();
            if !(radius > 0.0 && radius.is_finite()) {
                return cx.err(p.radius.span(), "radius must be positive");
            }
            let kappa = cx.q(&p.kappa)?;
            let base_z = cx.c(&p.base_z)?;
            if base_z.norm() > radius || base_z.norm() == 0.0 {
                return cx.err(p.base_z.span(), "base_z must lie in 0 < |z| ≤ radius");
            }
            let basis_change = match &p.basis_change {
                None => None,
                Some(b) => {
                    let rows = b.get_ref();
                    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                        return cx.err(b.span(), "basis_change must be a 4x4 integer matrix");
                    }
                    let m = Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect());
                    if m.det().is_zero() {
                        return cx.err(b.span(), "basis_change is singular");
                    }
                    Some(m)
                }
            };
            Some(PeriodsModel { operator, order, radius, kappa, base_z, basis_change })
        }
    };

    let dgla = match &raw.dgla {
        None => None,
        Some(d) => {
            let order = match &d.order {
                Some(o) => cx.positive_usize(o, "order")? as u32,
                None => 4,
            };
            let source = match (&d.builtin, &d.dims) {
                (Some(b), None) => match b.get_ref().as_str() {
                    "torus" => DglaSource::Torus,
                    "random" => DglaSource::Random(d.seed),
                    other => return cx.err(b.span(), format!("unknown builtin DGLA {other:?}")),
                },
                (None, Some(dims)) => {
                    let dbar_raw = d.dbar.as_ref().map_or_else(|| cx.err(dims.span(), "explicit DGLA needs dbar"), Ok)?;
                    let mut dbar = Vec::new();
                    for m in dbar_raw {
                        let rows: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(|x| cx.q(x)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
                        let cols = rows.first().map_or(0, |r| r.len());
                        if rows.iter().any(|r| r.len() != cols) {
                            return cx.err(dims.span(), "ragged dbar matrix");
                        }
                        dbar.push(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j].clone()));
                    }
                    let mut triples = Vec::new();
                    for t in d.bracket.iter().flatten() {
                        triples.push((t.i, t.j, t.k, cx.q(&t.c)?));
                    }
                    let m = DGLAModel::new(dims.get_ref().clone(), dbar, &triples, None).or_else(|e| cx.err(dims.span(), e.to_string()))?;
                    m.validate().or_else(|e| cx.err(dims.span(), e.to_string()))?;
                    DglaSource::Explicit(m)
                }
                (Some(b), Some(_)) => return cx.err(b.span(), "give either builtin or dims, not both"),
                (None, None) => return cx.err(raw.name.span(), "[dgla] needs builtin or dims"),
            };
            let directions = match &d.directions {
                None => None,
                Some(ds) => Some(ds.iter().map(|v| v.iter().map(|x| cx.q(x)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?),
            };
            Some(DglaSpec { source, directions, order })
        }
    };

    let quantization = match &raw.quantization {
        None => None,
        Some(qm) => {
            let base = cx.cmat(&qm.base)?;
            let x = cx.cmat(&qm.x)?;
            let y = cx.cmat(&qm.y)?;
            let n = base.nrows();
            if x.nrows() != n || y.nrows() != n {
                return cx.err(qm.x.span(), "loop directions must match the base dimension");
            }
            let side = *qm.side.get_ref();
            if !(side > 0.0 && side.is_finite()) {
                return cx.err(qm.side.span(), "side must be positive");
            }
            let mut path = Vec::new();
            for p in qm.path.get_ref() {
                let m = cx.cmat(p)?;
                if m.nrows() != n {
                    return cx.err(p.span(), "path matrix dimension differs from base");
                }
                path.push(m);
            }
            if path.len() < 2 {
                return cx.err(qm.path.span(), "path needs at least two Siegel matrices");
            }
            for (p, m) in qm.path.get_ref().iter().zip(&path).chain(std::iter::once((&qm.base, &base))) {
                crate::quantization::check_siegel(m).or_else(|e| cx.err(p.span(), e.to_string()))?;
            }
            Some(QuantModel { base, x, y, side, path })
        }
    };

    let anomaly = match &raw.anomaly {
        None => None,
        Some(a) => {
            let g_max = cx.positive_usize(&a.g_max, "g_max")?;
            if g_max > 6 {
                return cx.err(a.g_max.span(), "g_max above 6 is not supported");
            }
            let derivative = match &a.derivative {
                None => CovariantDerivative::Flat,
                Some(d) if d.get_ref() == "flat" => CovariantDerivative::Flat,
                Some(d) if d.get_ref() == "kahler" => CovariantDerivative::KahlerWeighted,
                Some(d) => return cx.err(d.span(), format!("derivative must be \"flat\" or \"kahler\", got {:?}", d.get_ref())),
            };
            let (sample, family) = match &a.builtin {
                Some(b) if b.get_ref() == "toy" => crate::anomaly::toy_sample_and_family(g_max, derivative).or_else(|e| cx.err(b.span(), e.to_string()))?,
                Some(b) => return cx.err(b.span(), format!("unknown builtin family {:?}", b.get_ref())),
                None => {
                    let need = |o: &Option<Spanned<String>>, what: &str| -> Result<Gq, ModelError> {
                        match o {
                            Some(s) => Ok(Gq::real(cx.q(s)?)),
                            None => cx.err(a.g_max.span(), format!("[anomaly] needs {what}")),
                        }
                    };
                    let sample = ToySample::new(
                        cx.poly(a.cbar.as_deref().unwrap_or(&[]))?,
                        need(&a.e2k, "e2k")?,
                        need(&a.ginv, "ginv")?,
                        cx.poly(a.dk.as_deref().unwrap_or(&[]))?,
                    )
                    .or_else(|e| cx.err(a.g_max.span(), e.to_string()))?;
                    let family = match (&a.family, &a.f1) {
                        (Some(f), None) => {
                            let fs = f.iter().map(|t| cx.poly(t)).collect::<Result<Vec<_>, _>>()?;
                            FreeEnergyFamily::new(fs).or_else(|e| cx.err(a.g_max.span(), e.to_string()))?
                        }
                        (None, Some(f1)) => {
                            let hol = a.holomorphic.iter().flatten().map(|t| cx.poly(t)).collect::<Result<Vec<_>, _>>()?;
                            FreeEnergyFamily::solve_z0(&sample, &cx.poly(f1)?, &hol, g_max, derivative)
                                .or_else(|e| cx.err(a.g_max.span(), e.to_string()))?
                        }
                        _ => return cx.err(a.g_max.span(), "[anomaly] needs exactly one of family or f1"),
                    };
                    (sample, family)
                }
            };
            let path = match &a.path {
                None => vec![C64::new(0.0, 0.0), C64::new(0.02, 0.01)],
                Some(p) => {
                    let mut v = vec![C64::new(0.0, 0.0)];
                    for s in p.get_ref() {
                        v.push(cx.c(s)?);
                    }
                    if v.len() < 2 {
                        return cx.err(p.span(), "path needs at least one offset");
                    }
                    v
                }
            };
            let lambda = match &a.lambda {
                Some(l) if !(*l.get_ref() > 0.0 && l.get_ref().is_finite()) => return cx.err(l.span(), "lambda must be positive"),
                Some(l) => Some(*l.get_ref()),
                None => None,
            };
            Some(AnomalyModel { sample, family, derivative, g_max, path, lambda })
        }
    };

    let lattice = match &raw.lattice {
        None => None,
        Some(l) => {
            let mut path = vec![C64::new(0.0, 0.0)];
            for s in l.path.get_ref() {
                path.push(cx.c(s)?);
            }
            if path.len() < 2 {
                return cx.err(l.path.span(), "path needs at least one offset");
            }
            let steps = match &l.steps {
                Some(s) => cx.positive_usize(s, "steps")?,
                None => 20,
            };
            Some(LatticeModel { path, steps })
        }
    };

    let plane = match &raw.plane {
        None => None,
        Some(p) => {
            let pairs = cx.positive_usize(&p.pairs, "pairs")?;
            let target = match (&p.u, &p.v) {
                (Some(u), Some(v)) => {
                    if u.get_ref().len() != 2 * pairs {
                        return cx.err(u.span(), format!("u needs {} entries", 2 * pairs));
                    }
                    if v.get_ref().len() != 2 * pairs {
                        return cx.err(v.span(), format!("v needs {} entries", 2 * pairs));
                    }
                    Some((u.get_ref().clone(), v.get_ref().clone()))
                }
                (None, None) => None,
                (Some(u), None) => return cx.err(u.span(), "u given without v"),
                (None, Some(v)) => return cx.err(v.span(), "v given without u"),
            };
            let bounds = p.bounds.get_ref().clone();
            if bounds.is_empty() || bounds.contains(&0) {
                return cx.err(p.bounds.span(), "bounds must be a nonempty list of positive integers");
            }
            Some(PlaneModel { pairs, target, bounds })
        }
    };

    let tolerances = match &raw.tolerances {
        None => Tolerances::default(),
        Some(t) => {
            let v = *t.get_ref();
            let all = [v.residual, v.holonomy_deviation, v.curvature_match, v.holomorphy, v.parallel, v.parallel_slope, v.lattice_imag];
            if all.iter().any(|x| !(*x > 0.0 && x.is_finite())) || !(v.slope_low < v.slope_high) {
                return cx.err(t.span(), "tolerances must be positive and slope_low < slope_high");
            }
            v
        }
    };

    Ok(Model {
        name: raw.name.into_inner(),
        fixture,
        periods,
        dgla,
        quantization,
        anomaly,
        lattice,
        plane,
        tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    const MINIMAL: &str = r#"
name = "quintic"
[periods]
operator = ["-120z", "-1250z", "-4375z", "-6250z", "1 - 3125z"]
order = 20
radius = 1.6e-4
kappa = "5"
base_z = "(1e-4,0)"
"#;

    #[test]
    fn z_polynomials() {
        assert_eq!(parse_z_poly("1 - 3125z").unwrap(), vec![qi(1), qi(-3125)]);
        assert_eq!(parse_z_poly("-120 z").unwrap(), vec![qi(0), qi(-120)]);
        assert_eq!(parse_z_poly("7/2*z^2+z").unwrap(), vec![qi(0), qi(1), q(7, 2)]);
        assert!(parse_z_poly("3x").is_err());
    }

    #[test]
    fn minimal_model_matches_builtin_operator() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.periods.unwrap().operator, PFOperator::quintic());
        assert_eq!(m.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_key_is_located() {
        let src = MINIMAL.replace("order = 20", "order = 20\nbogus = 1");
        let e = parse_model(&src).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn bad_rational_is_located() {
        let src = MINIMAL.replace("kappa = \"5\"", "kappa = \"5/0x\"");
        let e = parse_model(&src).unwrap_err();
        assert_eq!((e.line, e.column), (7, 9));
    }

    #[test]
    fn syntax_error_is_located() {
        let e = parse_model("name = \"x\"\n[periods\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn base_outside_radius_rejected() {
        let src = MINIMAL.replace("(1e-4,0)", "(1e-3,0)");
        let e = parse_model(&src).unwrap_err();
        assert_eq!(e.line, 8);
    }
}
