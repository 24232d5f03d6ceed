//! ν^{*t}[0, w] as the w-derivative of w ∫ e^{−xw} μ^{⊞t/w}(dx).

use freesub::cbf::Family;
use freesub::duality::{corollary_step, verify_corollary};

fn main() -> freesub::Result<()> {
    for family in [Family::Gamma, Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5)?] {
        for (t, w) in [(0.5, 2.0), (1.0, 1.0), (2.0, 0.5)] {
            let row = verify_corollary(&family, t, w, corollary_step(w), 1e-5)?;
            println!(
                "{:<18} t={t} w={w}: derivative {:.12}  cdf {:.12}  |Δ| {:.1e}",
                row.family, row.derivative, row.cdf, row.residual
            );
        }
    }
    Ok(())
}
