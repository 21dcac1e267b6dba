//! Extended period points, rational planes, lattice transport and the abelian period matrix.

use cymoduli::hodge_frame::{
    abelian_period_matrix, extended_point, frame_from_periods, lattice_transport, polarizing_j, quintic_integral_lattice,
    rational_plane_near, SymplecticSpace,
};
use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::scalar::{qi, render_q, C64};
use cymoduli::special_geometry::SpecialChart;

fn main() {
    let sp = SymplecticSpace::standard(2);
    let gamma = vec![qi(1), qi(1), qi(0), qi(0)];
    let mu = vec![qi(0), qi(0), qi(1), qi(0)];
    let p = extended_point(&sp, &gamma, &mu).unwrap();
    println!("Q(Ω,Ω) = {}, -iQ(Ω,Ω̄) = {}", p.isotropy(&sp), p.hermitian_norm(&sp));

    let u = [1.0, 0.0, 0.0, std::f64::consts::PI / 10.0];
    let v = [0.0, 0.0, 1.0, 0.0];
    for b in [1, 5, 50, 500] {
        let r = rational_plane_near(&sp, &u, &v, b).unwrap();
        let g: Vec<String> = r.gamma.iter().map(render_q).collect();
        println!("bound {b}: distance {:.3e}, gamma [{}]", r.distance, g.join(" "));
    }

    let chart = SpecialChart::new(frobenius_basis(&PFOperator::quintic(), 40, None).unwrap(), qi(5), 1.6e-4).unwrap();
    let t0 = chart.t_of_z(C64::new(1e-4, 0.0));
    let lat = quintic_integral_lattice(&chart).unwrap();
    let moved = lattice_transport(&chart, &lat, &[t0, t0 + C64::new(0.05, 0.05)], C64::new(0.0, 1.0), 20).unwrap();
    println!("det gram {}, transported imaginary part {:.1e}", render_q(&lat.det_gram()), moved.imag_part);
    let frame = frame_from_periods(&chart, moved.end).unwrap();
    let s = abelian_period_matrix(&moved.basis, &polarizing_j(&frame), &chart.sigma).unwrap();
    println!("Siegel point Z = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", s.z[(0, 0)], s.z[(0, 1)], s.z[(1, 0)], s.z[(1, 1)]);
}
