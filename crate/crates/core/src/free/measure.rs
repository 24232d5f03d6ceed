//! Atom/density decomposition of μ^{⊞t} and its Laplace transform.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::stieltjes::DEFAULT_LADDER;
use super::FreeLaw;
use crate::cbf::Family;
use crate::error::{Error, Result};
use crate::quad::{tanh_sinh, Integrator};
use crate::report::sig17;
use crate::series::{guarded_sum, LogTerm, StableSeriesControl};
use crate::special::{ln_abs_gamma_reciprocal, ln_gamma_positive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    #[serde(serialize_with = "sig17")]
    pub location: f64,
    #[serde(serialize_with = "sig17")]
    pub mass: f64,
}

/// How the absolutely continuous part is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    MarchenkoPastur,
    InverseGaussian,
    /// Boundary values of G from the numerical inversion.
    Stieltjes,
    None,
}

/// Atoms plus an absolutely continuous part supported on [lo, hi].
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDecomposition {
    law: FreeLaw,
    atoms: Vec<Atom>,
    lo: f64,
    hi: f64,
    kind: DensityKind,
}

/// Laplace transform value and the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeLaplace {
    pub value: f64,
    pub method: LaplaceMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceMethod {
    Series,
    ClosedFormMeasure,
    Contour,
}

impl LaplaceMethod {
    pub fn tag(self) -> &'static str {
        match self {
            LaplaceMethod::Series => "series",
            LaplaceMethod::ClosedFormMeasure => "closed-form-measure",
            LaplaceMethod::Contour => "contour",
        }
    }
}

fn marchenko_pastur_edges(t: f64) -> (f64, f64) {
    let s = t.sqrt();
    ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s))
}

impl FreeLaw {
    pub fn measure(&self) -> Result<MeasureDecomposition> {
        let t = self.t;
        let shift = self.shift();
        let atom_mass = self.predicted_atom();
        let mut atoms = Vec::new();
        if atom_mass > 0.0 {
            atoms.push(Atom { location: shift, mass: atom_mass });
        }
        let (lo, hi, kind) = match self.family {
            Family::PoissonExp => {
                let (a, b) = marchenko_pastur_edges(t);
                (a, b, DensityKind::MarchenkoPastur)
            }
            Family::InverseGaussian => {
                // core support starts at (1 − t)²/2, then shifted by κt
                (shift + 0.5 * (1.0 - t) * (1.0 - t), f64::INFINITY, DensityKind::InverseGaussian)
            }
            _ => {
                let lo = self.support_left();
                if lo.is_finite() {
                    (lo, self.support_right(), DensityKind::Stieltjes)
                } else {
                    (shift, shift, DensityKind::None)
                }
            }
        };
        if kind == DensityKind::Stieltjes {
            for a in &atoms {
                let detected = self.atom_mass(a.location, &DEFAULT_LADDER)?;
                if (detected - a.mass).abs() > 1e-4 {
                    return Err(Error::Extrapolation(format!(
                        "atom at {} has detected mass {detected} against {}",
                        a.location, a.mass
                    )));
                }
            }
        }
        Ok(MeasureDecomposition {
            law: self.clone(),
            atoms,
            lo,
            hi,
            kind,
        })
    }

    /// ∫ e^{−wx} μ^{⊞t}(dx).
    pub fn laplace(&self, w: f64) -> Result<FreeLaplace> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::domain("free_laplace", format!("w = {w} must be positive")));
        }
        match self.family {
            Family::FreeStable { alpha } => match self.stable_laplace_series(alpha, w) {
                Ok(value) => Ok(FreeLaplace { value, method: LaplaceMethod::Series }),
                Err(Error::SeriesDivergence(_)) => Ok(FreeLaplace {
                    value: self.contour_laplace(w)?,
                    method: LaplaceMethod::Contour,
                }),
                Err(e) => Err(e),
            },
            Family::PoissonExp | Family::InverseGaussian => Ok(FreeLaplace {
                value: self.measure()?.laplace(w)?,
                method: LaplaceMethod::ClosedFormMeasure,
            }),
            Family::Gamma | Family::Custom(_) => Ok(FreeLaplace {
                value: self.contour_laplace(w)?,
                method: LaplaceMethod::Contour,
            }),
        }
    }

    /// Σ (−1)ⁿ (t w^α)ⁿ / (n! Γ(2 − (1−α)n)).
    pub(crate) fn stable_laplace_series(&self, alpha: f64, w: f64) -> Result<f64> {
        let control = StableSeriesControl::default();
        let a = 1.0 - alpha;
        let x = self.t * w.powf(alpha);
        if x > control.asymptotic_switch {
            return Err(Error::SeriesDivergence(format!("argument {x:.3e} too large")));
        }
        let lx = x.ln();
        guarded_sum(
            &control,
            "free stable laplace series",
            0,
            |n| {
                let nf = n as f64;
                match ln_abs_gamma_reciprocal(2.0 - a * nf) {
                    None => LogTerm::ZERO,
                    Some((lg, s)) => {
                        let lf = ln_gamma_positive(nf + 1.0);
                        LogTerm {
                            ln_abs: nf * lx - lf + lg,
                            sign: if n % 2 == 0 { s } else { -s },
                            scale: (nf * lx).abs() + lf + lg.abs(),
                        }
                    }
                }
            },
            |n| {
                let nf = n as f64;
                let s = a * nf;
                let g = if s <= 1.5 { 1.2f64.ln() } else { ln_gamma_positive(s - 1.0) - PI.ln() };
                nf * lx - ln_gamma_positive(nf + 1.0) + g
            },
        )
    }

    /// −(1/π) Im ∫ e^{−wz} G(z) dz along the ray z = x₀ + s e^{iπ/4} that
    /// starts left of the support.
    pub(crate) fn contour_laplace(&self, w: f64) -> Result<f64> {
        let x0 = self.shift() - (1.0 / w).min(1.0);
        let dir = Complex64::from_polar(1.0, FRAC_PI_4);
        // arc length in units of the decay length 1/w
        let scale = 1.0 / w.min(1.0);
        let integral = Integrator::new(1e-15, 1e-13).try_integrate_to_infinity(
            |r| {
                let z = x0 + dir * (scale * r);
                let g = self.cauchy_transform(z)?;
                Ok(((-w * z).exp() * g * dir).im)
            },
            0.0,
        )?;
        Ok(-scale * integral.value / PI)
    }
}

impl MeasureDecomposition {
    pub fn law(&self) -> &FreeLaw {
        &self.law
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Support interval of the absolutely continuous part.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    /// Density of the absolutely continuous part at x.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > self.lo && x < self.hi) {
            return Ok(0.0);
        }
        let t = self.law.t();
        match self.kind {
            DensityKind::MarchenkoPastur => {
                let d = x - 1.0 - t;
                Ok((4.0 * t - d * d).max(0.0).sqrt() / (2.0 * PI * x))
            }
            DensityKind::InverseGaussian => {
                let u = x - self.law.shift();
                let r = 2.0 * u - (1.0 - t) * (1.0 - t);
                Ok(t * r.max(0.0).sqrt() / (PI * u * (u + 2.0 * t)))
            }
            DensityKind::Stieltjes => self.law.boundary_density(x),
            DensityKind::None => Ok(0.0),
        }
    }

    /// ∫ g(x) density(x) dx in variables adapted to each density.
    fn integrate_density(&self, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let t = self.law.t();
        match self.kind {
            DensityKind::None => Ok(0.0),
            DensityKind::MarchenkoPastur => {
                // x = c + r cos θ turns the density into r² sin²θ / (2πx);
                // written from the left edge to keep x accurate near 0
                let r = 2.0 * t.sqrt();
                let left = (1.0 - t.sqrt()).powi(2);
                Ok(Integrator::new(tol, tol)
                    .integrate(
                        |th| {
                            let h = (0.5 * th).cos();
                            let x = left + 2.0 * r * h * h;
                            let s = r * th.sin();
                            g(x) * s * s / (2.0 * PI * x)
                        },
                        0.0,
                        PI,
                    )?
                    .value)
            }
            DensityKind::InverseGaussian => {
                // u = lo + v²
                let shift = self.law.shift();
                let lo = 0.5 * (1.0 - t) * (1.0 - t);
                Ok(Integrator::new(tol, tol)
                    .integrate_to_infinity(
                        |v| {
                            let u = lo + v * v;
                            let dens = t * (2.0f64).sqrt() * v / (PI * u * (u + 2.0 * t));
                            g(shift + u) * dens * 2.0 * v
                        },
                        0.0,
                    )?
                    .value)
            }
            DensityKind::Stieltjes => {
                let lo = self.lo;
                if self.hi.is_finite() {
                    Ok(tanh_sinh(|x| Ok(g(x) * self.density(x)?), lo, self.hi, tol)?.value)
                } else {
                    // x = lo + s (1 − v)/v with the heavy tail at v = 0
                    let s = 1.0 + lo.abs();
                    Ok(tanh_sinh(
                        |v| {
                            if v <= 0.0 {
                                return Ok(0.0);
                            }
                            let x = lo + s * (1.0 - v) / v;
                            if !x.is_finite() {
                                return Ok(0.0);
                            }
                            Ok(g(x) * self.density(x)? * s / (v * v))
                        },
                        0.0,
                        1.0,
                        tol,
                    )?
                    .value)
                }
            }
        }
    }

    /// Atom masses plus the integral of the density.
    pub fn total_mass(&self) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        Ok(atoms + self.integrate_density(|_| 1.0, 1e-10)?)
    }

    /// Mean by quadrature; infinite means show up as non-convergence.
    pub fn mean(&self) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * a.location).sum();
        Ok(atoms + self.integrate_density(|x| x, 1e-10)?)
    }

    /// ∫ e^{−wx} μ(dx) by quadrature of the decomposition.
    pub fn laplace(&self, w: f64) -> Result<f64> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::domain("free_laplace", format!("w = {w} must be positive")));
        }
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * (-w * a.location).exp()).sum();
        Ok(atoms + self.integrate_density(|x| (-w * x).exp(), 1e-14)?)
    }

    pub fn tabulate(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|&x| Ok((x, self.density(x)?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbf::CbfSpec;
    use crate::special;

    fn law(f: Family, t: f64) -> FreeLaw {
        FreeLaw::new(f, t).unwrap()
    }

    #[test]
    fn marchenko_pastur_decomposition() {
        let m = law(Family::PoissonExp, 0.5).measure().unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.atoms()[0].location, 0.0);
        assert!((m.atoms()[0].mass - 0.5).abs() < 1e-15);
        let (lo, hi) = m.support();
        assert!((lo - 0.085_786_437_6).abs() < 1e-9 && (hi - 2.914_213_562_4).abs() < 1e-9);
        assert!(law(Family::PoissonExp, 2.0).measure().unwrap().atoms().is_empty());
    }

    #[test]
    fn closed_form_densities_match_stieltjes_inversion() {
        for (f, xs) in [
            (Family::PoissonExp, [0.5, 1.0, 2.0, 3.0]),
            (Family::InverseGaussian, [1.5, 2.0, 4.0, 10.0]),
        ] {
            let l = law(f.clone(), 1.0);
            let m = l.measure().unwrap();
            for x in xs {
                let a = m.density(x).unwrap();
                let b = l.stieltjes_density(x, &DEFAULT_LADDER).unwrap();
                assert!((a - b).abs() < 1e-3 * a, "{f} x={x}: {a} vs {b}");
            }
        }
        let m = law(Family::InverseGaussian, 1.0).measure().unwrap();
        assert!((m.density(2.0).unwrap() - 2f64.sqrt() / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn normalisation() {
        let cases = [
            (Family::PoissonExp, 0.5),
            (Family::PoissonExp, 2.0),
            (Family::InverseGaussian, 0.5),
            (Family::InverseGaussian, 2.0),
            (Family::Gamma, 0.5),
            (Family::Gamma, 2.0),
            (Family::free_stable(0.5).unwrap(), 1.0),
            (Family::free_stable(0.7).unwrap(), 0.5),
            (Family::Custom(CbfSpec::new(2.0, 0.0, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap()), 0.7),
        ];
        for (f, t) in cases {
            let m = law(f.clone(), t).measure().unwrap();
            let mass = m.total_mass().unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "{f} t={t}: {mass}");
        }
    }

    #[test]
    fn bounded_exponent_means() {
        let l = law(Family::Custom(CbfSpec::new(2.0, 0.0, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap()), 0.7);
        let m = l.measure().unwrap().mean().unwrap();
        assert!((m - l.mean()).abs() < 1e-3 * l.mean(), "{m} vs {}", l.mean());
        let mp = law(Family::PoissonExp, 1.5);
        assert!((mp.measure().unwrap().mean().unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn laplace_examples() {
        let g = law(Family::Gamma, 1.0).laplace(1.0).unwrap();
        assert_eq!(g.method, LaplaceMethod::Contour);
        assert!((g.value - (-1.0f64).exp()).abs() < 1e-10, "{}", g.value);
        let s = law(Family::free_stable(0.5).unwrap(), 1.0);
        let series = s.laplace(1.0).unwrap();
        assert_eq!(series.method, LaplaceMethod::Series);
        let quad = s.measure().unwrap().laplace(1.0).unwrap();
        assert!((series.value - quad).abs() < 1e-4, "{} vs {quad}", series.value);
        for f in [Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5).unwrap()] {
            let v = law(f.clone(), 1.0).laplace(1e-9).unwrap().value;
            assert!((v - 1.0).abs() < 1e-4, "{f}: {v}");
        }
        // 1 − L(w) ~ w ln(1/w) for the gamma family
        let v = law(Family::Gamma, 1.0).laplace(1e-4).unwrap().value;
        assert!((v - 1.0).abs() < 2e-3, "{v}");
    }

    #[test]
    fn gamma_laplace_has_closed_form() {
        // ∫ e^{−wx} μ^{⊞t}(dx) = P(wt, w) − t P(wt + 1, w)
        for t in [0.5, 1.0, 2.0] {
            let l = law(Family::Gamma, t);
            for w in [0.1, 1.0, 5.0] {
                let exact = special::regularized_gamma(w * t, w).unwrap().0
                    - t * special::regularized_gamma(w * t + 1.0, w).unwrap().0;
                let v = l.laplace(w).unwrap().value;
                assert!((v - exact).abs() < 1e-11, "t={t} w={w}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn contour_matches_measure_quadrature() {
        for (f, t) in [(Family::PoissonExp, 0.5), (Family::InverseGaussian, 1.5)] {
            let l = law(f.clone(), t);
            for w in [0.2, 2.0] {
                let a = l.contour_laplace(w).unwrap();
                let b = l.measure().unwrap().laplace(w).unwrap();
                assert!((a - b).abs() < 1e-11, "{f} w={w}: {a} vs {b}");
            }
        }
        let s = law(Family::free_stable(0.4).unwrap(), 1.0);
        let a = s.contour_laplace(1.0).unwrap();
        let b = s.stable_laplace_series(0.4, 1.0).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}
