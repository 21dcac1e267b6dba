//! The Hodge frame, its Weil operator J and the derivative of J.

use cymoduli::hodge_frame::{dj_convergence, frame_from_periods, torus_dj};
use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::scalar::{qi, C64};
use cymoduli::special_geometry::SpecialChart;
use cymoduli::torus::TorusGeometry;

fn main() {
    let chart = SpecialChart::new(frobenius_basis(&PFOperator::quintic(), 40, None).unwrap(), qi(5), 1.6e-4).unwrap();
    let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
    let frame = frame_from_periods(&chart, t0).unwrap();
    println!("invariants {:?}", frame.invariants());
    println!("Gmetric signature {:?}", frame.signature());

    let conv = dj_convergence(&chart, t0, 1e-3).unwrap();
    for r in &conv.reports {
        println!("h = {:.1e}: measured {:.6e}, formula {:.6e}, ratio {:.6}", r.h, r.measured, r.wit12, r.ratio);
    }
    println!("slope {:.3}", conv.slope);

    let d = torus_dj(&TorusGeometry::new());
    println!("torus: measured / formula = {:?}", d.ratio.map(|x| x.to_string()));
}
