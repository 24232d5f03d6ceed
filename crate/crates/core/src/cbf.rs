//! Complete Bernstein functions.
//!
//! A [`Family`] is either one of the four closed-form built-ins or a
//! [`CbfSpec`], the Pick representation
//!
//! ```text
//! f(z) = a + b z + Σᵢ mᵢ (z xᵢ − 1) / (z + xᵢ)
//! ```
//!
//! with a finite atomic measure ρ = Σ mᵢ δ_{xᵢ}. All evaluations use the
//! principal branch with the cut on the negative real axis.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Pick representation of a complete Bernstein function with finitely many
/// atoms in the representing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct CbfSpec {
    a: f64,
    b: f64,
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    a: f64,
    b: f64,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
}

impl TryFrom<RawSpec> for CbfSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        CbfSpec::new(raw.a, raw.b, raw.atoms.into_iter().map(|[x, m]| (x, m)).collect())
    }
}

impl From<CbfSpec> for RawSpec {
    fn from(spec: CbfSpec) -> Self {
        RawSpec {
            a: spec.a,
            b: spec.b,
            atoms: spec.atoms.into_iter().map(|(x, m)| [x, m]).collect(),
        }
    }
}

impl CbfSpec {
    /// Validates a ≥ 0, b ≥ 0, positive finite atoms and a ≥ Σ mᵢ/xᵢ.
    pub fn new(a: f64, b: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidSpec(format!("a = {a} must be finite and >= 0")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidSpec(format!("b = {b} must be finite and >= 0")));
        }
        for &(x, m) in &atoms {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidSpec(format!("atom location {x} must be positive")));
            }
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidSpec(format!("atom mass {m} must be positive")));
            }
        }
        let weight: f64 = atoms.iter().map(|&(x, m)| (1.0 / x).max(1.0) * m).sum();
        if !weight.is_finite() {
            return Err(Error::InvalidSpec("atom weights are not summable".into()));
        }
        let floor: f64 = atoms.iter().map(|&(x, m)| m / x).sum();
        if a < floor * (1.0 - 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "a = {a} is below the required sum of m/x = {floor}"
            )));
        }
        Ok(Self { a, b, atoms })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.a, 0.0) + self.b * z;
        for &(x, m) in &self.atoms {
            acc += m * (z * x - 1.0) / (z + x);
        }
        acc
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.b, 0.0);
        for &(x, m) in &self.atoms {
            let d = z + x;
            acc += m * (x * x + 1.0) / (d * d);
        }
        acc
    }

    /// f(0+) = a − Σ mᵢ/xᵢ.
    fn value_at_zero(&self) -> f64 {
        (self.a - self.atoms.iter().map(|&(x, m)| m / x).sum::<f64>()).max(0.0)
    }
}

/// A complete Bernstein function: a closed-form built-in or a custom Pick
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// f(z) = z^{1−α}
    FreeStable { alpha: f64 },
    /// f(z) = ln(1 + z)
    Gamma,
    /// f(z) = z / (z + 1)
    PoissonExp,
    /// f(z) = √(1 + 2z)
    InverseGaussian,
    Custom(CbfSpec),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::FreeStable { alpha } => write!(f, "free-stable({alpha})"),
            Family::Gamma => f.write_str("gamma"),
            Family::PoissonExp => f.write_str("poisson-exp"),
            Family::InverseGaussian => f.write_str("inverse-gaussian"),
            Family::Custom(_) => f.write_str("custom"),
        }
    }
}

fn check_point(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("cbf_eval", format!("non-finite point {z}")));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::domain("cbf_eval", format!("{z} lies on the cut (-inf, 0)")));
    }
    Ok(())
}

impl Family {
    pub fn free_stable(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(Family::FreeStable { alpha })
        } else {
            Err(Error::InvalidSpec(format!("alpha = {alpha} must lie in (0, 1)")))
        }
    }

    /// Short lowercase tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Family::FreeStable { .. } => "free-stable",
            Family::Gamma => "gamma",
            Family::PoissonExp => "poisson-exp",
            Family::InverseGaussian => "inverse-gaussian",
            Family::Custom(_) => "custom",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Family::Custom(_))
    }

    /// f(z) off the cut. z = 0 returns the limit f(0+).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_point(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        Ok(self.eval(Complex64::new(x, 0.0))?.re)
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match self {
            Family::FreeStable { alpha } => {
                if z == Complex64::new(0.0, 0.0) {
                    z
                } else {
                    (z.ln() * (1.0 - alpha)).exp()
                }
            }
            Family::Gamma => (z + 1.0).ln(),
            Family::PoissonExp => z / (z + 1.0),
            Family::InverseGaussian => (z * 2.0 + 1.0).sqrt(),
            Family::Custom(spec) => spec.eval(z),
        }
    }

    /// f′(z) off the cut.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            Family::FreeStable { alpha } => (z.ln() * -alpha).exp() * (1.0 - alpha),
            Family::Gamma => (z + 1.0).inv(),
            Family::PoissonExp => {
                let d = z + 1.0;
                (d * d).inv()
            }
            Family::InverseGaussian => (z * 2.0 + 1.0).sqrt().inv(),
            Family::Custom(spec) => spec.derivative(z),
        }
    }

    /// The killing rate κ = f(0+).
    pub fn killing(&self) -> f64 {
        match self {
            Family::InverseGaussian => 1.0,
            Family::Custom(spec) => spec.value_at_zero(),
            _ => 0.0,
        }
    }

    /// f(z) − f(0+), the exponent with the killing term split off.
    pub(crate) fn eval_core(&self, z: Complex64) -> Complex64 {
        match self {
            // √(1+2z) − 1 = 2z / (√(1+2z) + 1) without cancellation near 0
            Family::InverseGaussian => z * 2.0 / ((z * 2.0 + 1.0).sqrt() + 1.0),
            _ => self.eval_unchecked(z) - self.killing(),
        }
    }

    /// f′(0+); infinite for the free stable family.
    pub fn slope_at_zero(&self) -> f64 {
        match self {
            Family::FreeStable { .. } => f64::INFINITY,
            Family::Gamma | Family::PoissonExp | Family::InverseGaussian => 1.0,
            Family::Custom(spec) => spec.derivative(Complex64::new(0.0, 0.0)).re,
        }
    }

    /// Whether f is unbounded on (0, ∞).
    pub fn is_unbounded(&self) -> bool {
        match self {
            Family::FreeStable { .. } | Family::Gamma | Family::InverseGaussian => true,
            Family::PoissonExp => false,
            Family::Custom(spec) => spec.b > 0.0,
        }
    }

    /// Linear drift coefficient b.
    pub fn drift(&self) -> f64 {
        match self {
            Family::Custom(spec) => spec.b,
            _ => 0.0,
        }
    }

    /// Zero linear drift, i.e. f(z)/z → 0.
    pub fn is_flat(&self) -> bool {
        self.drift() == 0.0
    }

    /// f(Z)/Z at Z = 1e12, the numerical flatness witness.
    pub fn flatness_ratio(&self) -> f64 {
        let big = 1e12;
        self.eval_unchecked(Complex64::new(big, 0.0)).re / big
    }

    fn levy_shape(&self) -> Result<(f64, f64, f64)> {
        // π(x) = c x^{−p} e^{−q x}
        match self {
            Family::FreeStable { alpha } => Ok((
                (1.0 - alpha) * special::gamma_reciprocal(*alpha),
                2.0 - alpha,
                0.0,
            )),
            Family::Gamma => Ok((1.0, 1.0, 1.0)),
            Family::PoissonExp => Ok((1.0, 0.0, 1.0)),
            Family::InverseGaussian => Ok(((2.0 * PI).sqrt().recip(), 1.5, 0.5)),
            Family::Custom(_) => Err(Error::Unsupported("levy_density")),
        }
    }

    /// Completely monotone Lévy density π(x) of the built-in families.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        self.levy_density_derivative(x, 0)
    }

    /// n-th derivative of the Lévy density, in closed form.
    pub fn levy_density_derivative(&self, x: f64, n: u32) -> Result<f64> {
        let (c, p, q) = self.levy_shape()?;
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::domain("levy_density", format!("x = {x} must be positive")));
        }
        // Leibniz rule on x^{−p} · e^{−qx}
        let mut total = 0.0;
        let mut binom = 1.0;
        let mut rising = 1.0;
        for k in 0..=n {
            if k > 0 {
                binom *= (n - k + 1) as f64 / k as f64;
                rising *= p + (k - 1) as f64;
            }
            let power_part = if k % 2 == 0 { rising } else { -rising } * x.powf(-p - k as f64);
            let exp_part = (-q).powi((n - k) as i32);
            total += binom * power_part * exp_part;
        }
        Ok(c * total * (-q * x).exp())
    }
}

/// Outcome of a numerical Pick-property scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PickReport {
    pub min_imag: f64,
    pub argmin: Complex64,
    pub pass: bool,
}

const PICK_TOLERANCE: f64 = -1e-12;

/// Scan Im f(z) over upper half-plane points; passes when the minimum is
/// at least −1e-12.
pub fn pick_property_check(family: &Family, grid: &[Complex64]) -> Result<PickReport> {
    let mut min_imag = f64::INFINITY;
    let mut argmin = Complex64::new(f64::NAN, f64::NAN);
    for &z in grid {
        if !(z.im > 0.0) {
            return Err(Error::domain(
                "pick_property_check",
                format!("{z} is not in the upper half-plane"),
            ));
        }
        let v = family.eval(z)?.im;
        if v < min_imag {
            min_imag = v;
            argmin = z;
        }
    }
    Ok(PickReport {
        min_imag,
        argmin,
        pass: min_imag >= PICK_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{tanh_sinh, Integrator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn builtins() -> Vec<Family> {
        vec![
            Family::free_stable(0.3).unwrap(),
            Family::free_stable(0.5).unwrap(),
            Family::Gamma,
            Family::PoissonExp,
            Family::InverseGaussian,
        ]
    }

    #[test]
    fn eval_examples() {
        let spec = CbfSpec::new(0.5, 0.0, vec![(1.0, 0.5)]).unwrap();
        let v = Family::Custom(spec).eval(c(1.0, 0.0)).unwrap();
        assert!(CbfSpec::new(0.5, 0.0, vec![(1.0, 1.0)]).is_err());
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(Family::Gamma.eval_real(0.0).unwrap(), 0.0);
        assert!(Family::Gamma.eval_real(1e-300).unwrap().abs() < 1e-299);
        assert_eq!(Family::InverseGaussian.eval_real(0.0).unwrap(), 1.0);
        assert!(Family::Gamma.eval(c(-1.0, 0.0)).is_err());
        assert!(Family::PoissonExp.eval(c(-0.5, 0.0)).is_err());
    }

    #[test]
    fn custom_representation_reproduces_poisson_exponent() {
        let spec = Family::Custom(CbfSpec::new(0.5, 0.0, vec![(1.0, 0.5)]).unwrap());
        for z in [c(0.3, 0.0), c(2.0, 1.0), c(-3.0, 0.5), c(0.0, 7.0)] {
            let a = spec.eval(z).unwrap();
            let b = Family::PoissonExp.eval(z).unwrap();
            assert!((a - b).norm() < 1e-14, "{z}");
        }
        assert_eq!(spec.killing(), 0.0);
        assert!((spec.slope_at_zero() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(CbfSpec::new(0.4, 0.0, vec![(1.0, 1.0)]).is_err());
        assert!(CbfSpec::new(-1.0, 0.0, vec![]).is_err());
        assert!(CbfSpec::new(1.0, -1.0, vec![]).is_err());
        assert!(CbfSpec::new(1.0, 0.0, vec![(0.0, 1.0)]).is_err());
        assert!(CbfSpec::new(1.0, 0.0, vec![(1.0, -1.0)]).is_err());
        assert!(CbfSpec::new(f64::NAN, 0.0, vec![]).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = CbfSpec::from_json(r#"{"a": 1.5, "b": 0, "atoms": [[1, 1], [2.5, 0.25]]}"#)
            .unwrap();
        assert_eq!(spec.atoms(), &[(1.0, 1.0), (2.5, 0.25)]);
        assert_eq!(CbfSpec::from_json(&spec.to_json()).unwrap(), spec);
        let err = CbfSpec::from_json(r#"{"a": 0.1, "b": 0, "atoms": [[1, 1]]}"#);
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
        assert!(CbfSpec::from_json(r#"{"a": 1}"#).is_err());
    }

    #[test]
    fn flatness() {
        assert!(Family::Gamma.is_flat());
        assert!(Family::free_stable(0.3).unwrap().is_flat());
        let linear = Family::Custom(CbfSpec::new(0.0, 1.0, vec![]).unwrap());
        assert!(!linear.is_flat());
        for f in builtins() {
            assert!(f.is_flat());
        }
        // the witness decays like Z^{-α} and Z^{-1/2}; too slow for α ≤ 1/2 and
        // the inverse Gaussian exponent at Z = 1e12
        assert!(Family::InverseGaussian.flatness_ratio() < 2e-6);
        for f in [Family::Gamma, Family::PoissonExp] {
            assert!(f.flatness_ratio() < 1e-6, "{f}");
        }
        assert!(Family::free_stable(0.6).unwrap().flatness_ratio() < 1e-6);
        assert!(linear.flatness_ratio() >= 1e-6);
        assert!(Family::free_stable(1.7).is_err());
        assert!(Family::free_stable(0.0).is_err());
    }

    #[test]
    fn pick_property_examples() {
        let grid = [c(0.0, 1.0), c(1.0, 1.0), c(-1.0, 2.0), c(0.0, 10.0)];
        for f in [
            Family::Gamma,
            Family::PoissonExp,
            Family::Custom(CbfSpec::new(1.0, 0.0, vec![(1.0, 1.0)]).unwrap()),
        ] {
            let r = pick_property_check(&f, &grid).unwrap();
            assert!(r.pass && r.min_imag > 0.0, "{f}: {r:?}");
        }
        assert!(pick_property_check(&Family::Gamma, &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn pick_property_dense_grid_all_families() {
        let mut grid = Vec::new();
        for i in 0..40 {
            for j in 0..20 {
                grid.push(c(-20.0 + i as f64, 1e-3 * 1.6f64.powi(j)));
            }
        }
        let mut fams = builtins();
        fams.push(Family::Custom(
            CbfSpec::new(2.0, 0.5, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap(),
        ));
        for f in fams {
            assert!(pick_property_check(&f, &grid).unwrap().pass, "{f}");
        }
    }

    #[test]
    fn conjugate_symmetry_of_custom_specs() {
        let f = Family::Custom(CbfSpec::new(2.0, 0.5, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap());
        for z in [c(0.3, 0.7), c(-4.0, 2.0), c(10.0, -3.0)] {
            let a = f.eval(z.conj()).unwrap();
            let b = f.eval(z).unwrap().conj();
            assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm());
        }
    }

    #[test]
    fn levy_density_examples() {
        let e1 = (-1.0f64).exp();
        assert!((Family::PoissonExp.levy_density(1.0).unwrap() - e1).abs() < 1e-16);
        assert!((Family::Gamma.levy_density(1.0).unwrap() - e1).abs() < 1e-16);
        let ig = Family::InverseGaussian.levy_density(1.0).unwrap();
        assert!((ig - (-0.5f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-16);
        assert!((ig - 0.241_970_724_519_143_37).abs() < 1e-15);
        let custom = Family::Custom(CbfSpec::new(1.0, 0.0, vec![]).unwrap());
        assert_eq!(custom.levy_density(1.0), Err(Error::Unsupported("levy_density")));
        assert!(Family::Gamma.levy_density(0.0).is_err());
    }

    /// a_eff + ∫(1 − e^{−zx}) π(x) dx computed with the x→0 singularity on
    /// [0, 1] and the tail mapped through x = 1/v onto (0, 1].
    fn bernstein_integral(f: &Family, z: f64) -> f64 {
        let g = |x: f64| -(-z * x).exp_m1() * f.levy_density(x).unwrap();
        let head = tanh_sinh(|x| Ok(g(x)), 0.0, 1.0, 1e-13).unwrap().value;
        let tail = tanh_sinh(|v| Ok(g(1.0 / v) / (v * v)), 0.0, 1.0, 1e-13)
            .unwrap()
            .value;
        f.killing() + head + tail
    }

    #[test]
    fn levy_densities_reproduce_the_exponents() {
        for f in builtins() {
            for z in [0.5, 1.0, 2.0, 5.0] {
                let lhs = bernstein_integral(&f, z);
                let rhs = f.eval_real(z).unwrap();
                assert!(((lhs - rhs) / rhs).abs() < 1e-8, "{f} z={z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn frullani_oracle_for_gamma() {
        // ∫(1 − e^{−zx}) e^{−x}/x dx = ln(1 + z), checked with plain GK
        for z in [0.5, 1.0, 2.0] {
            let v = Integrator::new(1e-14, 1e-13)
                .integrate_to_infinity(|x| -(-z * x).exp_m1() * (-x).exp() / x, 0.0)
                .unwrap()
                .value;
            assert!((v - (1.0f64 + z).ln()).abs() < 1e-11);
        }
    }

    #[test]
    fn exponents_strictly_increase_on_positive_axis() {
        let mut fams = builtins();
        fams.push(Family::Custom(CbfSpec::new(1.0, 0.0, vec![(1.0, 1.0)]).unwrap()));
        for f in fams {
            let mut prev = f.eval_real(0.0).unwrap();
            let mut x = 0.01;
            while x < 1e4 {
                let v = f.eval_real(x).unwrap();
                assert!(v > prev, "{f} at {x}");
                prev = v;
                x *= 1.3;
            }
        }
    }

    #[test]
    fn levy_densities_are_completely_monotone() {
        for f in builtins() {
            for x in [0.5, 1.0, 2.0, 4.0] {
                for n in 0..=4 {
                    let d = f.levy_density_derivative(x, n).unwrap();
                    let signed = if n % 2 == 0 { d } else { -d };
                    assert!(signed >= 0.0, "{f} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        for f in builtins() {
            for x in [0.5, 1.0, 2.0] {
                for n in 0..3 {
                    let h = 1e-5;
                    let fd = (f.levy_density_derivative(x + h, n).unwrap()
                        - f.levy_density_derivative(x - h, n).unwrap())
                        / (2.0 * h);
                    let exact = f.levy_density_derivative(x, n + 1).unwrap();
                    assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{f} n={n}");
                }
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let mut fams = builtins();
        fams.push(Family::Custom(CbfSpec::new(2.0, 0.5, vec![(0.5, 0.25)]).unwrap()));
        for f in fams {
            for z in [c(0.7, 0.2), c(-2.0, 1.0), c(3.0, -0.5)] {
                let h = 1e-6;
                let fd = (f.eval(z + h).unwrap() - f.eval(z - h).unwrap()) / (2.0 * h);
                assert!((fd - f.derivative(z)).norm() < 1e-8, "{f} {z}");
            }
        }
    }

    #[test]
    fn core_exponent_vanishes_at_zero() {
        for f in builtins() {
            let v = f.eval_core(c(1e-16, 0.0)).re;
            assert!(v.abs() < 1e-6, "{f}: {v}");
        }
        let ig = Family::InverseGaussian.eval_core(c(1e-12, 0.0)).re;
        assert!((ig - 1e-12).abs() < 1e-24);
    }
}
