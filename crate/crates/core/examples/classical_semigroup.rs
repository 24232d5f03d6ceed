//! CDF and density of ν^{*t}, and the Laplace transform check.

use freesub::cbf::Family;
use freesub::classical::ClassicalLaw;

fn main() -> freesub::Result<()> {
    for family in [Family::Gamma, Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5)?] {
        let law = ClassicalLaw::new(family.clone(), 1.0)?;
        println!("{family}: total mass {:.6}, atom at 0 {:.6}", law.total_mass(), law.atom_at_zero()?);
        for row in law.tabulate(&[0.25, 0.5, 1.0, 2.0, 4.0])? {
            println!("  y = {:<5} cdf = {:.10}  pdf = {:.10}", row.y, row.cdf, row.pdf);
        }
        println!("  |∫e^(-2y)ν(dy) − e^(−f(2))| = {:.2e}", law.laplace_residual(2.0)?);
    }
    Ok(())
}
