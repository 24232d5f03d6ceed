//! Special functions used across the crate.

use freesub::special::{bessel_i1, erfc, lambert_w_minus1, ln_gamma, lower_incomplete_gamma, regularized_gamma};

fn main() -> freesub::Result<()> {
    println!("ln Γ(0.5)        = {:.15}", ln_gamma(0.5)?);
    let (p, q) = regularized_gamma(2.5, 1.0)?;
    println!("P(2.5, 1), Q     = {p:.15}, {q:.15}");
    println!("γ(2.5, 1)        = {:.15}", lower_incomplete_gamma(2.5, 1.0)?);
    println!("I₁(2)            = {:.15}", bessel_i1(2.0)?);
    println!("erfc(0.5)        = {:.15}", erfc(0.5));
    for x in [-0.3, -0.1, -1e-3, -1e-10] {
        let w = lambert_w_minus1(x)?;
        println!("W₋₁({x:>7}) = {w:>18.12}   w eʷ = {:.3e}", w * w.exp());
    }
    Ok(())
}
