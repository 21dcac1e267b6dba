//! Flatness of D = ∇ + tθ + t⁻¹θ̄ on the quintic and on the torus.

use cymoduli::connections::{flatness_convergence, torus_chsv_curvature};
use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::scalar::{qi, C64};
use cymoduli::special_geometry::SpecialChart;
use cymoduli::torus::TorusGeometry;

fn main() {
    let chart = SpecialChart::new(frobenius_basis(&PFOperator::quintic(), 40, None).unwrap(), qi(5), 1.6e-4).unwrap();
    let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
    for t in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::from_polar(1.0, 0.3)] {
        let (a, _, slope) = flatness_convergence(&chart, t0, 1e-3, t).unwrap();
        println!("t = {t:.3}: plaquettes {:.2e} {:.2e} {:.2e}, slope {slope:.3}", a.blocks[0], a.blocks[1], a.blocks[2]);
    }
    let fl = torus_chsv_curvature(&TorusGeometry::new());
    println!("torus: exactly flat {}, transversal {}", fl.all_zero, fl.transversality);
}
