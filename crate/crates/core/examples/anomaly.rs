//! The master operator on the quintic and the genus expansion of the anomaly equations.

use cymoduli::anomaly::{
    master_operator, parallel_convergence, toy_sample_and_family, z0_equivalence_check, CovariantDerivative, Z0Options,
    ZConvention,
};
use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::quantization::{CMat, CVec, GaussianState};
use cymoduli::report::poly;
use cymoduli::scalar::{qi, C64};
use cymoduli::special_geometry::SpecialChart;

fn main() {
    let chart = SpecialChart::new(frobenius_basis(&PFOperator::quintic(), 40, None).unwrap(), qi(5), 1.6e-4).unwrap();
    let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
    let op = master_operator(&chart.sample(&chart.point_t(t0).unwrap()).unwrap()).unwrap();
    println!("coefficient {:.10}, e^2K {:.6e}", op.coeff[0][(0, 0)], op.e2k);

    let state = GaussianState {
        q: CMat::from_element(1, 1, C64::new(0.3, 0.2)),
        l: CVec::from_element(1, C64::new(0.5, -0.1)),
        s: C64::new(0.0, 0.0),
    };
    let path = [t0, t0 + C64::new(0.02, 0.01)];
    let conv = parallel_convergence(&chart, &path, &state, &[4, 8, 16, 32], 10.0).unwrap();
    for r in &conv.reports {
        println!("{} steps: residual {:.2e}", r.steps, r.master_residual);
    }
    println!("order {:.2}", conv.slope);

    let (sample, family) = toy_sample_and_family(3, CovariantDerivative::Flat).unwrap();
    for conv in [ZConvention::Witten, ZConvention::Bcov] {
        let r = z0_equivalence_check(&family, &sample, 3, Z0Options { convention: conv, derivative: CovariantDerivative::Flat }).unwrap();
        println!("{}: per genus zero {}, linear residual by order:", conv.name(), r.per_genus_zero());
        for (m, p) in r.linear.iter().enumerate() {
            println!("  lambda^{}: {}", 2 * m, poly(p));
        }
    }
}
