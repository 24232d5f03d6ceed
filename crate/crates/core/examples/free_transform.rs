//! F, G and the inverse map of μ^{⊞t}, by continuation and in closed form.

use num_complex::Complex64;

use freesub::cbf::Family;
use freesub::free::FreeLaw;

fn main() -> freesub::Result<()> {
    let z = Complex64::new(1.5, 0.25);
    for family in [Family::Gamma, Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5)?] {
        let law = FreeLaw::new(family.clone(), 1.0)?;
        let state = law.invert(z)?;
        let back = law.inverse_map(state.w_current)?;
        println!(
            "{family:<18} F(z) = {:.10}  G(z) = {:.10}  |F⁻¹(F(z)) − z| = {:.1e}  ({} waypoints)",
            state.w_current,
            law.cauchy_transform(z)?,
            (back - z).norm(),
            state.path.len()
        );
        if let Some(closed) = law.f_transform_closed_form(z) {
            println!("{:<18} closed form    {:.10}", "", closed?);
        }
    }
    let gamma = FreeLaw::new(Family::Gamma, 2.0)?;
    for x in [-10.0, -1.0, -0.1] {
        let z = Complex64::new(x, 0.0);
        let newton = gamma.f_transform(z)?.re;
        let lambert = gamma.f_transform_closed_form(z).expect("real axis")?.re;
        println!("gamma t=2 F({x}) = {newton:.14}  via W₋₁ {lambert:.14}");
    }
    Ok(())
}
