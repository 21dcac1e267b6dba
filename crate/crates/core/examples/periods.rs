//! Frobenius periods of the quintic and its mirror map.

use cymoduli::picard_fuchs::{frobenius_basis, mirror_map, PFOperator};
use cymoduli::scalar::render_q;

fn main() {
    let op = PFOperator::quintic();
    let frame = frobenius_basis(&op, 12, None).expect("quintic operator has a MUM point");
    for (a, s) in frame.solutions.iter().enumerate() {
        let head: Vec<String> = (0..4).map(|k| render_q(&s.block(0).coeff(k))).collect();
        println!("solution {a}: log power {}, regular part {} ...", s.max_log_power(), head.join(", "));
    }
    let (q, z) = mirror_map(&frame).unwrap();
    let show = |s: &cymoduli::series::TruncSeries<_>| (1..5).map(|k| render_q(&s.coeff(k))).collect::<Vec<_>>().join(", ");
    println!("q(z) = {} ...", show(&q));
    println!("z(q) = {} ...", show(&z));
}
