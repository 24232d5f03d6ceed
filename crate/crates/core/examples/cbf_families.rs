//! The built-in exponents, a custom Pick representation and membership checks.

use num_complex::Complex64;

use freesub::cbf::{pick_property_check, CbfSpec, Family};

fn main() -> freesub::Result<()> {
    let custom = CbfSpec::from_json(r#"{"a": 0.5, "b": 0, "atoms": [[1, 0.5]]}"#)?;
    let families = [
        Family::free_stable(0.5)?,
        Family::Gamma,
        Family::PoissonExp,
        Family::InverseGaussian,
        Family::Custom(custom),
    ];
    let grid: Vec<Complex64> = (0..400)
        .map(|k| Complex64::new(-20.0 + 0.1 * k as f64, 10f64.powi(k % 7 - 4)))
        .collect();
    println!("{:<18} {:>12} {:>12} {:>10} {:>8}", "family", "f(1)", "f(0+)", "f'(0+)", "pick");
    for f in &families {
        let pick = pick_property_check(f, &grid)?;
        println!(
            "{:<18} {:>12.8} {:>12.8} {:>10.4} {:>8}",
            f.to_string(),
            f.eval_real(1.0)?,
            f.killing(),
            f.slope_at_zero(),
            pick.pass
        );
    }
    let z = Complex64::new(-3.0, 0.5);
    println!("\ngamma f({z}) = {}", Family::Gamma.eval(z)?);
    println!("gamma Lévy density at 1 = {:.10}", Family::Gamma.levy_density(1.0)?);
    Ok(())
}
