use cymoduli::anomaly::{z0_equivalence_check, CovariantDerivative, FreeEnergyFamily, ToySample, Z0Options, ZConvention, DEGREE_CAP};
use cymoduli::hodge_frame::{best_rational, extended_point, rational_plane_near, SymplecticSpace};
use cymoduli::kuranishi::{mc_residual, random_model, residual_is_zero, solve_maurer_cartan};
use cymoduli::model::parse_z_poly;
use cymoduli::poly::Poly;
use cymoduli::report::{Format, Report};
use cymoduli::scalar::{q, q_to_f64, qi, Gq, Scalar, Q};
use cymoduli::series::TruncSeries;
use num_traits::Signed;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| q(n, d))
}

fn series(order: usize) -> impl Strategy<Value = TruncSeries<Q>> {
    proptest::collection::vec(rat(), order).prop_map(move |c| TruncSeries::new(c, order))
}

fn gq(x: Q) -> Gq {
    Gq::real(x)
}

fn mono(t: u8, tb: u8, c: Q) -> Poly {
    Poly::monomial(2, DEGREE_CAP, vec![t, tb], gq(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reciprocal_is_inverse(mut a in series(8), c0 in rat()) {
        prop_assume!(!c0.is_zero());
        let mut cs = a.coeffs().to_vec();
        cs[0] = c0;
        a = TruncSeries::new(cs, 8);
        let p = a.mul(&a.reciprocal().unwrap()).unwrap();
        prop_assert_eq!(p, TruncSeries::one(8));
    }

    #[test]
    fn reversion_composes_to_identity(tail in series(7), c1 in rat()) {
        prop_assume!(!c1.is_zero());
        let mut cs = vec![qi(0), c1];
        cs.extend(tail.coeffs()[..6].iter().cloned());
        let f = TruncSeries::new(cs, 8);
        let g = f.reversion().unwrap();
        prop_assert_eq!(f.compose(&g).unwrap(), TruncSeries::var(8));
    }

    #[test]
    fn exp_log_roundtrip(tail in series(8)) {
        let mut cs = tail.coeffs().to_vec();
        cs[0] = qi(0);
        let a = TruncSeries::new(cs, 8);
        prop_assert_eq!(a.exp().unwrap().log().unwrap(), a);
    }

    #[test]
    fn maurer_cartan_exact_for_any_seed(seed in 0u64..10_000) {
        let m = random_model(seed);
        let phi = solve_maurer_cartan(&m, &m.harmonic_basis(), 3).unwrap();
        prop_assert!(residual_is_zero(&mc_residual(&m, &phi)));
    }

    #[test]
    fn z0_identity_on_random_toys(
        c0 in rat(), c1 in rat(), e2k in rat(), ginv in rat(), k1 in rat(), a in rat(), b in rat(), kahler in any::<bool>()
    ) {
        prop_assume!(!e2k.is_zero() && !ginv.is_zero());
        let d = if kahler { CovariantDerivative::KahlerWeighted } else { CovariantDerivative::Flat };
        let cbar = mono(0, 0, c0).add(&mono(0, 1, c1));
        let sample = ToySample::new(cbar, gq(e2k), gq(ginv), mono(0, 1, k1)).unwrap();
        let f1 = mono(1, 1, a).add(&mono(0, 2, b));
        let fam = FreeEnergyFamily::solve_z0(&sample, &f1, &[mono(2, 0, qi(1))], 3, d).unwrap();
        for conv in [ZConvention::Witten, ZConvention::Bcov] {
            let r = z0_equivalence_check(&fam, &sample, 3, Z0Options { convention: conv, derivative: d }).unwrap();
            prop_assert!(r.per_genus_zero() && r.discrepancy_zero());
            if conv == ZConvention::Witten {
                prop_assert!(r.only_f1_term());
            }
        }
    }

    #[test]
    fn best_rational_respects_bound(x in -50.0f64..50.0, bound in 1u64..200) {
        let r = best_rational(x, bound);
        prop_assert!(r.denom() <= &num_bigint::BigInt::from(bound));
        prop_assert!((q_to_f64(&r) - x).abs() <= 1.0 / bound as f64);
    }

    #[test]
    fn rational_plane_monotone(u in proptest::collection::vec(-1.0f64..1.0, 4), v in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let sp = SymplecticSpace::standard(2);
        let w = u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
        prop_assume!(w.abs() > 1e-3);
        let v: Vec<f64> = if w < 0.0 { v.iter().map(|x| -x).collect() } else { v };
        let mut last = f64::INFINITY;
        for b in [1, 3, 9, 27] {
            let r = rational_plane_near(&sp, &u, &v, b).unwrap();
            prop_assert!(r.distance <= last);
            prop_assert!(r.pairing.is_positive());
            last = r.distance;
        }
    }

    #[test]
    fn extended_points_isotropic(moves in proptest::collection::vec((proptest::collection::vec(-1i64..=1, 6), prop_oneof![Just(1i64), Just(-1i64)]), 0..4)) {
        let sp = SymplecticSpace::standard(3);
        let unit = |i: usize| (0..6).map(|j| if i == j { qi(1) } else { qi(0) }).collect::<Vec<Q>>();
        let (mut g, mut m) = (unit(0), unit(3));
        for (v, k) in &moves {
            let v: Vec<Q> = v.iter().map(|x| qi(*x)).collect();
            let tv = |x: &[Q]| {
                let w = sp.pair_q(&v, x) * qi(*k);
                x.iter().zip(&v).map(|(a, b)| a + &w * b).collect::<Vec<Q>>()
            };
            g = tv(&g);
            m = tv(&m);
        }
        let p = extended_point(&sp, &g, &m).unwrap();
        prop_assert!(p.isotropy(&sp).is_zero());
        prop_assert_eq!(p.hermitian_norm(&sp), Gq::int(2, 0));
    }

    #[test]
    fn z_polynomial_parse_roundtrip(cs in proptest::collection::vec(-99i64..=99, 1..5)) {
        let mut text = String::new();
        for (k, c) in cs.iter().enumerate() {
            let z = match k {
                0 => String::new(),
                1 => "*z".to_string(),
                _ => format!("*z^{k}"),
            };
            let sign = if *c < 0 { "-" } else { "+" };
            if k == 0 {
                text = format!("{c}");
            } else {
                text = format!("{text} {sign} {}{z}", c.abs());
            }
        }
        let parsed = parse_z_poly(&text).unwrap();
        let mut want: Vec<Q> = cs.iter().map(|c| qi(*c)).collect();
        while want.len() > 1 && want.last().map_or(false, |x| x.is_zero()) {
            want.pop();
        }
        let mut got = parsed;
        while got.len() > 1 && got.last().map_or(false, |x| x.is_zero()) {
            got.pop();
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn csv_fields_roundtrip(cells in proptest::collection::vec("[ -~]{0,12}", 1..5)) {
        let cols: Vec<String> = (0..cells.len()).map(|k| format!("c{k}")).collect();
        let colrefs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut r = Report::new("x");
        r.table("t", &colrefs).row(cells.clone());
        let text = r.render(Format::Csv);
        let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
        let rows: Vec<Vec<String>> = rd.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
        prop_assert_eq!(&rows[3], &cells);
        prop_assert_eq!(r.render(Format::Csv), text);
    }
}
