//! Kuranishi solutions of the Maurer-Cartan equation in exact arithmetic.

use cymoduli::kuranishi::{mc_residual, random_model, residual_is_zero, solve_maurer_cartan, torus_model};

fn main() {
    for (name, model) in [("torus", torus_model()), ("random seed 3", random_model(3))] {
        let dirs = model.harmonic_basis();
        let phi = solve_maurer_cartan(&model, &dirs, 4).unwrap();
        let res = mc_residual(&model, &phi);
        let nonzero = phi.terms.values().filter(|v| v.iter().any(|x| *x != num_traits::Zero::zero())).count();
        println!("{name}: dims {:?}, {} directions, {nonzero} nonzero terms, residual zero: {}", model.dims, dirs.len(), residual_is_zero(&res));
    }
}
