//! ∫ e^{−wx} μ^{⊞t}(dx) against w^{−1}∫₀^w ν^{*wt}[0, y] dy on a grid.

use freesub::cbf::Family;
use freesub::duality::{gamma_closed_form, log_spaced, verify_theorem, GridSpec};

fn main() -> freesub::Result<()> {
    let grid = GridSpec::new(vec![0.5, 1.0, 2.0], log_spaced(0.1, 10.0, 10)?)?;
    let families = [Family::Gamma, Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5)?];
    let report = verify_theorem(&grid, &families);
    for row in report.rows.iter().filter(|r| r.w == 1.0 || r.w == 10.0) {
        println!(
            "{:<18} t={:<4} w={:<5} lhs {:.12} rhs {:.12} |Δ| {:.1e} [{}]",
            row.family, row.t, row.w, row.lhs, row.rhs, row.residual, row.lhs_method
        );
    }
    println!("max residual {:.2e}, testable {:.0}%, pass {}", report.max_residual, 100.0 * report.testable_fraction, report.pass);
    println!("gamma closed form at t=1, w=2: {:.12}", gamma_closed_form(1.0, 2.0)?);
    Ok(())
}
