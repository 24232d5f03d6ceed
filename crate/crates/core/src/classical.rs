//! The classical convolution semigroup ν^{*t} with ∫ e^{−zy} ν^{*t}(dy) = e^{−t f(z)}.
//!
//! For the inverse Gaussian exponent f = 1 + f₀ the law carries the factor
//! e^{−t} and has total mass e^{−t}.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};
use serde::Serialize;

use crate::cbf::Family;
use crate::error::{Error, Result};
use crate::quad::{tanh_sinh, Integrator};
pub use crate::series::StableSeriesControl;
use crate::series::{guarded_sum, LogTerm};
use crate::special::{self, ln_abs_gamma_reciprocal, ln_gamma_positive, sin_pi};

/// ν^{*t} for one family at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalLaw {
    family: Family,
    t: f64,
    control: StableSeriesControl,
}

/// One row of a CDF/density table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalRow {
    pub y: f64,
    pub cdf: f64,
    pub pdf: f64,
}

impl ClassicalLaw {
    pub fn new(family: Family, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::domain("ClassicalLaw", format!("t = {t} must be positive")));
        }
        Ok(Self {
            family,
            t,
            control: StableSeriesControl::default(),
        })
    }

    pub fn with_control(mut self, control: StableSeriesControl) -> Self {
        self.control = control;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Total mass e^{−κt}.
    pub fn total_mass(&self) -> f64 {
        (-self.family.killing() * self.t).exp()
    }

    /// Mass of the atom at 0.
    pub fn atom_at_zero(&self) -> Result<f64> {
        match self.family {
            Family::PoissonExp => Ok((-self.t).exp()),
            Family::Custom(_) => Err(Error::Unsupported("classical law")),
            _ => Ok(0.0),
        }
    }

    /// ν^{*t}[0, y], right-continuous.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::domain("classical_cdf", format!("y = {y} must be >= 0")));
        }
        let t = self.t;
        let v = match &self.family {
            Family::Gamma => {
                if y == 0.0 {
                    0.0
                } else {
                    special::regularized_gamma(t, y)?.0
                }
            }
            Family::PoissonExp => {
                let atom = (-t).exp();
                if y == 0.0 {
                    atom
                } else {
                    let body = Integrator::new(1e-15, 1e-13)
                        .try_integrate(|u| self.poisson_exp_pdf(u), 0.0, y)?
                        .value;
                    atom + body
                }
            }
            Family::InverseGaussian => {
                if y == 0.0 || y.is_infinite() {
                    if y == 0.0 {
                        0.0
                    } else {
                        self.total_mass()
                    }
                } else {
                    let sy = y.sqrt();
                    let u = (y + t) / (2.0 * y).sqrt();
                    let near = special::normal_cdf((y - t) / sy);
                    let far = 0.5 * (-(y - t) * (y - t) / (2.0 * y)).exp() * special::erfcx_nonneg(u);
                    (-t).exp() * (near + far)
                }
            }
            Family::FreeStable { alpha } => {
                if y == 0.0 {
                    0.0
                } else {
                    self.stable_cdf_series(1.0 - alpha, y)?
                }
            }
            Family::Custom(_) => return Err(Error::Unsupported("classical_cdf")),
        };
        Ok(v.clamp(0.0, self.total_mass()))
    }

    /// Density of the absolutely continuous part.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::domain("classical_pdf", format!("y = {y} must be > 0")));
        }
        let t = self.t;
        match &self.family {
            Family::Gamma => Ok(((t - 1.0) * y.ln() - y - ln_gamma_positive(t)).exp()),
            Family::PoissonExp => self.poisson_exp_pdf(y),
            Family::InverseGaussian => {
                let d = y - t;
                Ok(t / (2.0 * PI * y * y * y).sqrt() * (-t - d * d / (2.0 * y)).exp())
            }
            Family::FreeStable { alpha } => self.stable_pdf_series(1.0 - alpha, y),
            Family::Custom(_) => Err(Error::Unsupported("classical_pdf")),
        }
    }

    fn poisson_exp_pdf(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let t = self.t;
        let arg = 2.0 * (t * y).sqrt();
        let d = t.sqrt() - y.sqrt();
        Ok((t / y).sqrt() * (-d * d).exp() * special::bessel_i1_scaled(arg)?)
    }

    fn stable_cdf_series(&self, a: f64, y: f64) -> Result<f64> {
        let x = self.t * y.powf(-a);
        self.check_switch(x)?;
        let lx = x.ln();
        guarded_sum(
            &self.control,
            "stable cdf series",
            0,
            |n| {
                if n == 0 {
                    return LogTerm { ln_abs: 0.0, sign: 1.0, scale: 0.0 };
                }
                let nf = n as f64;
                match ln_abs_gamma_reciprocal(1.0 - a * nf) {
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
                if n == 0 {
                    0.0
                } else {
                    let nf = n as f64;
                    nf * lx - ln_gamma_positive(nf + 1.0) + ln_gamma_positive(a * nf) - PI.ln()
                }
            },
        )
    }

    fn stable_pdf_series(&self, a: f64, y: f64) -> Result<f64> {
        let x = self.t * y.powf(-a);
        self.check_switch(x)?;
        let lx = x.ln();
        let envelope = |n: usize| {
            let nf = n as f64;
            nf * lx + ln_gamma_positive(1.0 + a * nf) - ln_gamma_positive(nf + 1.0)
        };
        let s = guarded_sum(
            &self.control,
            "stable density series",
            1,
            |n| {
                let sn = sin_pi(n as f64 * a);
                if sn == 0.0 {
                    return LogTerm::ZERO;
                }
                let nf = n as f64;
                let lg = ln_gamma_positive(1.0 + a * nf);
                let lf = ln_gamma_positive(nf + 1.0);
                LogTerm {
                    ln_abs: nf * lx + lg - lf + sn.abs().ln(),
                    sign: if n % 2 == 1 { sn.signum() } else { -sn.signum() },
                    scale: (nf * lx).abs() + lg + lf,
                }
            },
            envelope,
        )?;
        Ok((s / (PI * y)).max(0.0))
    }

    fn check_switch(&self, x: f64) -> Result<()> {
        if x > self.control.asymptotic_switch {
            return Err(Error::SeriesDivergence(format!(
                "argument {x:.3e} beyond the asymptotic switch {}",
                self.control.asymptotic_switch
            )));
        }
        Ok(())
    }

    /// Smallest y (to bisection accuracy) at which the stable CDF series is
    /// accepted. Below it the CDF is only known to lie in [0, CDF(y*)].
    pub fn series_cutoff(&self) -> Result<f64> {
        self.cutoff(false)
    }

    fn cutoff(&self, density: bool) -> Result<f64> {
        let a = match self.family {
            Family::FreeStable { alpha } => 1.0 - alpha,
            _ => return Ok(0.0),
        };
        let y_of = |x: f64| (self.t / x).powf(1.0 / a);
        let ok = |x: f64| {
            let y = y_of(x);
            if density {
                self.stable_pdf_series(a, y).is_ok()
            } else {
                self.stable_cdf_series(a, y).is_ok()
            }
        };
        let mut good = 1e-3;
        if !ok(good) {
            return Err(Error::SeriesDivergence("series rejected even for tiny arguments".into()));
        }
        let mut bad = self.control.asymptotic_switch;
        if ok(bad) {
            return Ok(y_of(bad));
        }
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(y_of(good))
    }

    /// |atom + ∫ e^{−zy} p(y) dy − e^{−t f(z)}|.
    pub fn laplace_residual(&self, z: f64) -> Result<f64> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain("laplace_residual", format!("z = {z} must be positive")));
        }
        let target = (-self.t * self.family.eval_real(z)?).exp();
        Ok((self.laplace_transform(z)? - target).abs())
    }

    /// ∫ e^{−zy} ν^{*t}(dy) by quadrature of the atom and density.
    pub fn laplace_transform(&self, z: f64) -> Result<f64> {
        Ok(self.laplace_transform_bounded(z)?.0)
    }

    /// Laplace transform and a bound on the part left unresolved below the
    /// stable series cutoff.
    pub fn laplace_transform_bounded(&self, z: f64) -> Result<(f64, f64)> {
        let g = |y: f64| -> Result<f64> { Ok((-z * y).exp() * self.pdf(y)?) };
        let split = self.t.max(1.0);
        let tail = Integrator::new(1e-15, 1e-11)
            .try_integrate_to_infinity(|y| g(y), split)?
            .value;
        let lo = self.series_cutoff()?;
        let mut head = 0.0;
        let mut bound = 0.0;
        let mut body_start = 0.0;
        if lo > 0.0 {
            // [0, lo]: between e^{−z lo} CDF(lo) and CDF(lo)
            let c_lo = self.cdf(lo)?;
            head = 0.5 * c_lo * (1.0 + (-z * lo).exp());
            bound = 0.5 * c_lo * -(-z * lo).exp_m1();
            // [lo, hi]: by parts against the CDF
            let hi = self.cutoff(true)?.max(lo).min(split);
            let by_parts = Integrator::new(1e-15, 1e-11)
                .try_integrate(|y| Ok((-z * y).exp() * self.cdf(y)?), lo, hi)?
                .value;
            head += (-z * hi).exp() * self.cdf(hi)? - (-z * lo).exp() * c_lo + z * by_parts;
            body_start = hi;
        }
        let body = if body_start < split {
            if body_start > 0.0 {
                Integrator::new(1e-15, 1e-11).try_integrate(|y| g(y), body_start, split)?.value
            } else {
                tanh_sinh(|y| if y > 0.0 { g(y) } else { Ok(0.0) }, 0.0, split, 1e-12)?.value
            }
        } else {
            0.0
        };
        Ok((self.atom_at_zero()? + head + body + tail, bound))
    }

    pub fn tabulate(&self, ys: &[f64]) -> Result<Vec<ClassicalRow>> {
        ys.iter()
            .map(|&y| {
                Ok(ClassicalRow {
                    y,
                    cdf: self.cdf(y)?,
                    pdf: if y > 0.0 { self.pdf(y)? } else { f64::NAN },
                })
            })
            .collect()
    }
}

/// One draw of the increment Y_dt of the subordinator with exponent f
/// (the inverse Gaussian family samples the unkilled part f − 1).
pub fn sample_increment<R: Rng + ?Sized>(family: &Family, dt: f64, rng: &mut R) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("sample_increment", format!("dt = {dt} must be positive")));
    }
    match family {
        Family::Gamma => Ok(Gamma::new(dt, 1.0)
            .map_err(|e| Error::domain("sample_increment", e.to_string()))?
            .sample(rng)),
        Family::PoissonExp => {
            let n: f64 = Poisson::new(dt)
                .map_err(|e| Error::domain("sample_increment", e.to_string()))?
                .sample(rng);
            if n == 0.0 {
                Ok(0.0)
            } else {
                Ok(Gamma::new(n, 1.0)
                    .map_err(|e| Error::domain("sample_increment", e.to_string()))?
                    .sample(rng))
            }
        }
        Family::InverseGaussian => Ok(sample_inverse_gaussian(dt, dt * dt, rng)),
        Family::FreeStable { alpha } => {
            let a = 1.0 - alpha;
            Ok(dt.powf(1.0 / a) * sample_positive_stable(a, rng))
        }
        Family::Custom(_) => Err(Error::Unsupported("sample_increment")),
    }
}

/// Inverse Gaussian with the given mean and shape by transformation with
/// rejection.
pub(crate) fn sample_inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let n: f64 = StandardNormal.sample(rng);
    let y = n * n;
    let my = mean * y;
    let x = mean - 2.0 * mean * my / (my + (4.0 * mean * shape * y + my * my).sqrt());
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

/// Positive stable law with Laplace transform e^{−s^a}, angular representation.
pub(crate) fn sample_positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let ln_y = (a * u).sin().ln() - u.sin().ln() / a
        + (1.0 - a) / a * (((1.0 - a) * u).sin().ln() - e.ln());
    ln_y.exp()
}
