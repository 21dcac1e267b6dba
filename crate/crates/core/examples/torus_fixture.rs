//! The exact six-torus fixture: periods, metric and Yukawa couplings over Q(i).

use cymoduli::torus::{TorusGeometry, N};

fn main() {
    let g = TorusGeometry::new();
    println!("e^(-K) at the base point = {}", g.exp_mk0);
    let metric = g.metric();
    let diag: Vec<String> = (0..N).map(|i| metric[(i, i)].to_string()).collect();
    println!("metric diagonal {}", diag.join(" "));
    let y = g.yukawa();
    let mut nonzero = 0;
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                if *y.get(i, j, k) != cymoduli::scalar::Gq::real(cymoduli::scalar::qi(0)) {
                    nonzero += 1;
                }
            }
        }
    }
    println!("{nonzero} nonzero Yukawa components, symmetric {}", y.is_symmetric());
}
