//! Yukawa coupling in the flat coordinate and the integers n_d.

use cymoduli::picard_fuchs::{frobenius_basis, PFOperator};
use cymoduli::scalar::{qi, render_q};
use cymoduli::special_geometry::{instanton_numbers, yukawa_series};

fn main() {
    let frame = frobenius_basis(&PFOperator::quintic(), 10, None).unwrap();
    let (_, cttt) = yukawa_series(&frame, &qi(5)).unwrap();
    println!("C_ttt = {} + {} q + {} q^2 + ...", render_q(&cttt.coeff(0)), render_q(&cttt.coeff(1)), render_q(&cttt.coeff(2)));
    for (d, n) in instanton_numbers(&cttt, 9).unwrap().iter().enumerate().skip(1) {
        println!("n_{d} = {n}");
    }
}
