//! Weil-Petersson curvature identity: exact on the torus, finite differences on the quintic.

use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::scalar::{qi, C64};
use cymoduli::special_geometry::{curvature_check, SpecialChart};
use cymoduli::torus::TorusGeometry;

fn main() {
    let (lhs, rhs) = TorusGeometry::new().curvature_sides();
    println!("torus: {} components, both sides equal: {}", lhs.len(), lhs == rhs);

    let chart = SpecialChart::new(frobenius_basis(&PFOperator::quintic(), 40, None).unwrap(), qi(5), 1.6e-4).unwrap();
    let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
    for h in [2e-3, 1e-3, 5e-4] {
        let r = curvature_check(&chart, t0, h).unwrap();
        println!("quintic h = {h:.0e}: lhs {:.10e}, rhs {:.10e}, relative residual {:.2e}", r.lhs_fd, r.rhs, r.residual);
    }
}
