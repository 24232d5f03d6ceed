//! Kendall's identity and the renewal density of the first-passage process.

use freesub::cbf::Family;
use freesub::kendall::{kendall_suite, psi_root, renewal_density_formula, renewal_mc, KendallConfig, DEFAULT_SEED};

fn main() -> freesub::Result<()> {
    let n_paths = 20_000;
    for family in [Family::PoissonExp, Family::Gamma] {
        let report = kendall_suite(&family, &KendallConfig::standard(n_paths, DEFAULT_SEED))?;
        println!("{family}, {n_paths} paths");
        for c in &report.cells {
            println!(
                "  s∈[{}, {}] y∈[{}, {}]: {:.5} vs {:.5} ± {:.1e}",
                c.s_lo, c.s_hi, c.y_lo, c.y_hi, c.lhs, c.rhs, c.stderr
            );
        }
        for u in &report.u {
            println!("  u({}) = {:.5} ± {:.1e}, formula {:.5}", u.s, u.u_hat, u.stderr, u.u_formula);
        }
        println!("  ψ(1) = {:.10}", psi_root(&family, 1.0)?);
    }
    let est = renewal_mc(&Family::InverseGaussian, &[0.5, 1.0, 2.0], n_paths, 10.0, DEFAULT_SEED)?;
    for ((s, u), se) in est.s_grid.iter().zip(&est.u_hat).zip(&est.std_err) {
        println!("inverse-gaussian u({s}) = {u:.5} ± {se:.1e}, formula {:.5}", renewal_density_formula(&Family::InverseGaussian, *s)?);
    }
    Ok(())
}
