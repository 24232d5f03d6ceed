//! Atoms, support and density of μ^{⊞t} by Stieltjes inversion.

use freesub::cbf::Family;
use freesub::free::{FreeLaw, DEFAULT_LADDER};

fn main() -> freesub::Result<()> {
    for (family, t) in [(Family::PoissonExp, 0.5), (Family::InverseGaussian, 0.5), (Family::Gamma, 0.5), (Family::free_stable(0.5)?, 1.0)] {
        let law = FreeLaw::new(family.clone(), t)?;
        let m = law.measure()?;
        let (lo, hi) = m.support();
        println!("{family} t={t}: kind {:?}, support [{lo:.6}, {hi:.6}], atoms {:?}", m.kind(), m.atoms());
        println!("  total mass {:.8}", m.total_mass()?);
        let top = if hi.is_finite() { hi } else { lo + 4.0 };
        for k in 1..=4 {
            let x = lo + (top - lo) * k as f64 / 5.0;
            println!(
                "  x = {x:.4}  density {:.8}  ladder {:.8}",
                m.density(x)?,
                law.stieltjes_density(x, &DEFAULT_LADDER)?
            );
        }
    }
    Ok(())
}
