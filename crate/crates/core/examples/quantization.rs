//! Transport of Gaussian states between polarizations and holonomy of a small loop.

use cymoduli::quantization::{bogoliubov_image, square_loop_report, transport, CMat, GaussianState, GeneratorSign, Polarization};
use cymoduli::scalar::C64;

fn main() {
    let z0 = CMat::from_element(1, 1, C64::new(0.0, 1.0));
    let z1 = CMat::from_element(1, 1, C64::new(0.3, 2.0));
    let pol = Polarization::from_siegel(&z0).unwrap();
    let vac = GaussianState::vacuum(1).to_full(&pol).unwrap();
    let out = transport(&vac, &[z0.clone(), z1], 1000, GeneratorSign::Holomorphic).unwrap();
    let want = bogoliubov_image(&vac, &out.end).unwrap();
    println!("holomorphy residual {:.2e}", out.holomorphy_residual);
    println!("transported A = {:.10}, Bogoliubov A = {:.10}", out.state.a[(0, 0)], want[(0, 0)]);

    let x = CMat::identity(1, 1);
    let y = CMat::identity(1, 1) * C64::new(0.0, 1.0);
    let r = square_loop_report(&z0, &x, &y, 1e-2, 1000, GeneratorSign::Holomorphic).unwrap();
    println!("loop holonomy {:.12}, curvature integral {:.12}, mismatch {:.2e}", r.holonomy.log_scalar, r.curvature_integral, r.mismatch);
}
