//! The free convolution semigroup μ^{⊞t} whose Voiculescu transform is
//! φ(z) = t f(−z).
//!
//! The reciprocal Cauchy transform F = 1/G is the right inverse of
//! w ↦ w + t f(−w). It is computed by Newton continuation from the far field
//! in the upper half-plane and by a bracketed Newton solve on the real axis.
//! A killing term κ = f(0+) only shifts the measure by κt, so all solves run
//! on the core exponent f − κ.

mod measure;
mod stieltjes;

pub use measure::{Atom, DensityKind, FreeLaplace, LaplaceMethod, MeasureDecomposition};
pub use stieltjes::DEFAULT_LADDER;

use num_complex::Complex64;

use crate::cbf::Family;
use crate::error::{Error, Result};
use crate::special;

/// Height of the far-field anchor relative to 1 + t.
const ANCHOR_HEIGHT: f64 = 1e6;
const DEFAULT_WAYPOINTS: usize = 20;
const WAYPOINT_DOUBLINGS: usize = 3;
const NEWTON_ITERATIONS: usize = 60;
const BACKTRACKS: usize = 40;

/// μ^{⊞t} for a flat complete Bernstein function.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeLaw {
    family: Family,
    t: f64,
}

/// Scratch state of one continuation solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionState {
    pub z: Complex64,
    pub w_current: Complex64,
    pub path: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl FreeLaw {
    pub fn new(family: Family, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::domain("FreeLaw", format!("t = {t} must be positive")));
        }
        if !family.is_flat() {
            return Err(Error::InvalidSpec(format!(
                "{family} has a linear drift term; the free semigroup needs a flat exponent"
            )));
        }
        Ok(Self { family, t })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// κt, the shift produced by the killing term.
    pub fn shift(&self) -> f64 {
        self.family.killing() * self.t
    }

    /// z + t f(−z).
    pub fn inverse_map(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("f_inverse_map", format!("non-finite point {z}")));
        }
        if z.im == 0.0 && z.re > 0.0 {
            return Err(Error::domain("f_inverse_map", format!("{z} maps onto the cut")));
        }
        Ok(z + self.t * self.family.eval_unchecked(-z))
    }

    /// w + t (f − κ)(−w), no domain checks.
    pub(crate) fn core_map(&self, w: Complex64) -> Complex64 {
        w + self.t * self.family.eval_core(-w)
    }

    fn core_map_derivative(&self, w: Complex64) -> Complex64 {
        1.0 - self.t * self.family.derivative(-w)
    }

    /// F(z) = 1/G(z) for Im z ≠ 0, or real z left of the support.
    pub fn f_transform(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("f_transform", format!("non-finite point {z}")));
        }
        if z.im < 0.0 {
            return Ok(self.f_transform(z.conj())?.conj());
        }
        if z.im == 0.0 {
            return self.f_transform_real(z.re).map(|w| c(w, 0.0));
        }
        Ok(self.invert(z)?.w_current)
    }

    /// G(z) = 1/F(z).
    pub fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.f_transform(z)?.inv())
    }

    /// Continuation solve in the upper half-plane, retried with more
    /// waypoints on failure.
    pub fn invert(&self, z: Complex64) -> Result<InversionState> {
        if !(z.im > 0.0) {
            return Err(Error::domain("invert", format!("{z} is not in the upper half-plane")));
        }
        let mut n = DEFAULT_WAYPOINTS;
        let mut last = None;
        for _ in 0..=WAYPOINT_DOUBLINGS {
            match self.continuation(z, n) {
                Ok(state) => return Ok(state),
                Err(e) => last = Some(e),
            }
            n *= 2;
        }
        Err(last.expect("at least one attempt"))
    }

    fn continuation(&self, z: Complex64, n: usize) -> Result<InversionState> {
        let zc = z - self.shift();
        // raise the anchor until the map is w + small there
        let mut height = ANCHOR_HEIGHT * (1.0 + self.t);
        while height < 1e250 && self.t * self.family.eval_core(c(0.0, -height)).norm() > 1e-3 * height {
            height *= 1e3;
        }
        let n = n.max((height / zc.im).log10().ceil() as usize);
        let mut path = Vec::with_capacity(n + n / 4 + 1);
        if zc.im >= height {
            path.push(zc);
        } else {
            path.push(c(0.0, height));
            if zc.re != 0.0 {
                let legs = (n / 4).max(1);
                for k in 1..=legs {
                    path.push(c(zc.re * k as f64 / legs as f64, height));
                }
            }
            let ratio = zc.im / height;
            for k in 1..=n {
                let y = if k == n { zc.im } else { height * ratio.powf(k as f64 / n as f64) };
                path.push(c(zc.re, y));
            }
        }
        let start = path[0];
        let mut w = start - self.t * self.family.eval_core(-start);
        let mut prev = start;
        let scale = 1.0 + z.norm();
        let last = path.len() - 1;
        for (k, &target) in path.iter().enumerate() {
            if k > 0 {
                // Euler predictor along the path
                let d = self.core_map_derivative(w);
                let step = w + (target - prev) / d;
                if step.im > 0.0 && step.re.is_finite() && step.im.is_finite() {
                    w = step;
                }
            }
            let tol = if k == last {
                // rounding floor of the map evaluation itself
                let floor = 64.0 * f64::EPSILON * (w.norm() + self.t * self.family.eval_core(-w).norm());
                1e-12 * scale + floor
            } else {
                1e-6 * (1.0 + target.norm())
            };
            w = self.newton(target, w, tol, k == last)?;
            prev = target;
        }
        Ok(InversionState {
            z,
            w_current: w,
            path: path.into_iter().map(|p| p + self.shift()).collect(),
        })
    }

    fn newton(&self, target: Complex64, mut w: Complex64, tol: f64, polish: bool) -> Result<Complex64> {
        let mut r = self.core_map(w) - target;
        for _ in 0..NEWTON_ITERATIONS {
            let rn = r.norm();
            if rn <= tol && !polish {
                return Ok(w);
            }
            let step = r / self.core_map_derivative(w);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..BACKTRACKS {
                let cand = w - step * lambda;
                if cand.im > 0.0 {
                    let rc = self.core_map(cand) - target;
                    if rc.norm() < rn {
                        accepted = Some((cand, rc));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((cand, rc)) => {
                    let moved = (cand - w).norm();
                    w = cand;
                    r = rc;
                    if polish && r.norm() <= tol && moved <= 4.0 * f64::EPSILON * w.norm() {
                        return Ok(w);
                    }
                }
                None => {
                    if rn <= tol {
                        return Ok(w);
                    }
                    return Err(Error::Continuation(format!(
                        "Newton stalled at target {target} with residual {rn:.3e}"
                    )));
                }
            }
        }
        if r.norm() <= tol {
            Ok(w)
        } else {
            Err(Error::Continuation(format!(
                "no convergence at target {target}: residual {:.3e}",
                r.norm()
            )))
        }
    }

    /// Real w at which f(−w) stops being analytic.
    fn analytic_radius(&self) -> f64 {
        match &self.family {
            Family::FreeStable { .. } => 0.0,
            Family::Gamma | Family::PoissonExp => 1.0,
            Family::InverseGaussian => 0.5,
            Family::Custom(spec) => spec
                .atoms()
                .iter()
                .map(|&(x, _)| x)
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn real_map(&self, w: f64) -> f64 {
        self.core_map(c(w, 0.0)).re
    }

    fn real_slope(&self, w: f64) -> f64 {
        self.core_map_derivative(c(w, 0.0)).re
    }

    /// Maximiser of the core map on the real axis left of the analytic
    /// radius; the core measure's continuous part starts at its value.
    pub(crate) fn left_critical_point(&self) -> f64 {
        let radius = self.analytic_radius();
        let mut hi = if radius.is_finite() { radius } else { 1.0 };
        if !radius.is_finite() {
            while self.real_slope(hi) > 0.0 && hi < 1e300 {
                hi *= 2.0;
            }
            if self.real_slope(hi) > 0.0 {
                return f64::INFINITY;
            }
        }
        let mut lo = hi.min(0.0) - 1.0;
        while self.real_slope(lo) <= 0.0 {
            lo = 2.0 * lo - 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.real_slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Minimiser of the core map beyond the largest pole for bounded
    /// exponents; `None` when f is unbounded.
    pub(crate) fn right_critical_point(&self) -> Option<f64> {
        let start = match &self.family {
            Family::PoissonExp => 1.0,
            Family::Custom(spec) if !self.family.is_unbounded() => {
                spec.atoms().iter().map(|&(x, _)| x).fold(f64::NEG_INFINITY, f64::max)
            }
            _ => return None,
        };
        if !start.is_finite() {
            return None;
        }
        let mut lo = start;
        let mut hi = start + 1.0;
        while self.real_slope(hi) <= 0.0 {
            hi = start + 2.0 * (hi - start);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.real_slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }

    /// Left end of the continuous part of μ^{⊞t}.
    pub fn support_left(&self) -> f64 {
        let we = self.left_critical_point();
        if we.is_finite() {
            self.shift() + self.real_map(we)
        } else {
            f64::INFINITY
        }
    }

    /// Right end of the support (∞ for unbounded exponents).
    pub fn support_right(&self) -> f64 {
        match self.right_critical_point() {
            Some(w) => self.shift() + self.real_map(w),
            None => f64::INFINITY,
        }
    }

    /// Mass of the atom at κt predicted by the slope at the origin.
    pub fn predicted_atom(&self) -> f64 {
        (1.0 - self.t * self.family.slope_at_zero()).max(0.0)
    }

    fn f_transform_real(&self, z: f64) -> Result<f64> {
        let zc = z - self.shift();
        let we = self.left_critical_point();
        let edge = if we.is_finite() { self.real_map(we) } else { f64::INFINITY };
        if !(zc < edge) {
            return Err(Error::domain(
                "f_transform",
                format!("real point {z} is not left of the support"),
            ));
        }
        let hi = we.min(self.analytic_radius());
        let mut lo = zc.min(hi) - 1.0;
        let mut k = 0;
        while self.real_map(lo) >= zc {
            lo = zc.min(hi) - 2f64.powi(k) * (1.0 + zc.abs());
            k += 1;
            if k > 1100 {
                return Err(Error::Continuation("no real bracket found".into()));
            }
        }
        // concave increasing: Newton from the left converges monotonically
        let mut w = lo;
        for _ in 0..200 {
            let g = self.real_map(w) - zc;
            let d = self.real_slope(w);
            if !(d > 0.0) {
                break;
            }
            let next = (w - g / d).min(hi);
            if (next - w).abs() <= 2.0 * f64::EPSILON * w.abs().max(1e-300) {
                w = next;
                break;
            }
            w = next;
        }
        let residual = (self.real_map(w) - zc).abs();
        if residual > 1e-12 * (1.0 + z.abs()) {
            return Err(Error::Continuation(format!(
                "real solve at {z} left residual {residual:.3e}"
            )));
        }
        Ok(w)
    }

    /// Closed-form F where the family has one: the Marchenko–Pastur and
    /// inverse Gaussian laws everywhere, the gamma family on the real axis.
    pub fn f_transform_closed_form(&self, z: Complex64) -> Option<Result<Complex64>> {
        let t = self.t;
        match self.family {
            Family::PoissonExp => {
                if z.im < 0.0 {
                    return self.f_transform_closed_form(z.conj()).map(|r| r.map(|v| v.conj()));
                }
                let s = t.sqrt();
                let (a, b) = ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s));
                Some(Ok(0.5 * (z + 1.0 - t + (z - a).sqrt() * (z - b).sqrt())))
            }
            Family::InverseGaussian => {
                if z.im < 0.0 {
                    return self.f_transform_closed_form(z.conj()).map(|r| r.map(|v| v.conj()));
                }
                let u = c(1.0 + t * t, 0.0) - 2.0 * z;
                // on the cut take the limit from the upper half-plane in z
                let inner = if u.im == 0.0 && u.re < 0.0 { c(0.0, -(-u.re).sqrt()) } else { u.sqrt() };
                Some(Ok(z - t * t - t * inner))
            }
            Family::Gamma if z.im == 0.0 => {
                let x = z.re;
                let arg = -((x - 1.0) / t).exp() / t;
                Some(
                    special::lambert_w_minus1(arg)
                        .map(|w| c(1.0 + t * w, 0.0))
                        .and_then(|f| {
                            if x < self.support_left() {
                                Ok(f)
                            } else {
                                Err(Error::domain("f_transform", "real point inside the support"))
                            }
                        }),
                )
            }
            _ => None,
        }
    }

    /// −Im G(x + iη)/π with η = 1e-10·max(1, |x|): the boundary value of
    /// the density, usable up to the edges.
    pub fn boundary_density(&self, x: f64) -> Result<f64> {
        let eta = 1e-10 * x.abs().max(1.0);
        let g = self.cauchy_transform(c(x, eta))?;
        Ok((-g.im / std::f64::consts::PI).max(0.0))
    }

    /// Mean of μ^{⊞t}; finite only for bounded exponents.
    pub fn mean(&self) -> f64 {
        let limit = match &self.family {
            Family::PoissonExp => 1.0,
            Family::Custom(spec) if !self.family.is_unbounded() => {
                spec.a() + spec.atoms().iter().map(|&(x, m)| m * x).sum::<f64>()
            }
            _ => return f64::INFINITY,
        };
        self.t * limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbf::CbfSpec;

    fn law(f: Family, t: f64) -> FreeLaw {
        FreeLaw::new(f, t).unwrap()
    }

    fn families() -> Vec<Family> {
        vec![
            Family::free_stable(0.5).unwrap(),
            Family::free_stable(0.3).unwrap(),
            Family::Gamma,
            Family::PoissonExp,
            Family::InverseGaussian,
            Family::Custom(CbfSpec::new(2.0, 0.0, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap()),
        ]
    }

    #[test]
    fn inverse_map_examples() {
        let v = law(Family::PoissonExp, 1.0).inverse_map(c(-1.0, 0.0)).unwrap();
        assert!((v.re + 0.5).abs() < 1e-15);
        let v = law(Family::Gamma, 1.0).inverse_map(c(-1.0, 0.0)).unwrap();
        assert!((v.re - (-1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((v.re + 0.306_852_819_4).abs() < 1e-10);
        let tiny = law(Family::Gamma, 1e-14).inverse_map(c(-2.0, 1.0)).unwrap();
        assert!((tiny - c(-2.0, 1.0)).norm() < 1e-13);
        assert!(law(Family::Gamma, 1.0).inverse_map(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn drifting_exponents_are_rejected() {
        let spec = CbfSpec::new(0.0, 1.0, vec![]).unwrap();
        assert!(matches!(FreeLaw::new(Family::Custom(spec), 1.0), Err(Error::InvalidSpec(_))));
        assert!(FreeLaw::new(Family::Gamma, 0.0).is_err());
    }

    #[test]
    fn f_transform_examples() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let v = law(Family::PoissonExp, 1.0).f_transform(c(-1.0, 0.0)).unwrap();
        assert!((v.re + golden).abs() < 1e-10);
        let v = law(Family::InverseGaussian, 1.0).f_transform(c(-1.0, 0.0)).unwrap();
        assert!((v.re + 4.0).abs() < 1e-10);
        let g = law(Family::Gamma, 1.0);
        let v = g.f_transform(c(-1.0, 0.0)).unwrap();
        assert!((v.re + 2.146_193_220_620_583).abs() < 1e-10);
        let back = g.inverse_map(v).unwrap();
        assert!((back.re + 1.0).abs() < 1e-12);
        let gv = law(Family::PoissonExp, 1.0).cauchy_transform(c(-1.0, 0.0)).unwrap();
        assert!((gv.re + 2.0 / (1.0 + 5f64.sqrt())).abs() < 1e-10);
        let gg = g.cauchy_transform(c(-1.0, 0.0)).unwrap();
        assert!((gg.re + 0.465_941_272_38).abs() < 1e-10);
    }

    #[test]
    fn gamma_closed_form_at_other_times() {
        for (t, expected) in [(0.5, -1.447_542_160_637_616), (2.0, -4.356_693_980_033_321)] {
            let l = law(Family::Gamma, t);
            let v = l.f_transform(c(-1.0, 0.0)).unwrap().re;
            assert!((v - expected).abs() < 1e-10, "t={t}: {v}");
            let cf = l.f_transform_closed_form(c(-1.0, 0.0)).unwrap().unwrap().re;
            assert!((cf - expected).abs() < 1e-10, "t={t}: {cf}");
        }
    }

    #[test]
    fn far_field_normalisation() {
        for f in families() {
            let l = law(f.clone(), 1.0);
            let z = c(0.0, 1e14);
            let zg = z * l.cauchy_transform(z).unwrap();
            assert!((zg - 1.0).norm() < 1e-3, "{f}: {zg}");
        }
    }

    fn grid() -> Vec<Complex64> {
        let mut g = Vec::new();
        for i in 0..20 {
            for j in 0..10 {
                let re = -10.0 + 20.0 * i as f64 / 19.0;
                let im = 0.05 * (10.0f64 / 0.05).powf(j as f64 / 9.0);
                g.push(c(re, im));
            }
        }
        g
    }

    #[test]
    fn inverse_consistency_and_half_plane() {
        for f in families() {
            for t in [0.5, 1.0, 2.0] {
                let l = law(f.clone(), t);
                for z in grid() {
                    let w = l.f_transform(z).unwrap_or_else(|e| panic!("{f} t={t} z={z}: {e}"));
                    assert!(w.im >= 0.0, "{f} t={t} z={z}");
                    let back = l.inverse_map(w).unwrap();
                    assert!((back - z).norm() <= 1e-10 * z.norm(), "{f} t={t} z={z}");
                }
            }
        }
    }

    #[test]
    fn closed_forms_agree_with_newton() {
        for f in [Family::PoissonExp, Family::InverseGaussian, Family::Gamma] {
            for t in [0.5, 1.0, 2.0] {
                let l = law(f.clone(), t);
                let mut pts: Vec<Complex64> = (0..30).map(|k| c(-0.1 - 0.5 * k as f64, 0.0)).collect();
                if !matches!(f, Family::Gamma) {
                    pts.extend((0..30).map(|k| c(-8.0 + 0.6 * k as f64, 1.0)));
                }
                for z in pts {
                    let a = l.f_transform(z).unwrap();
                    let b = l.f_transform_closed_form(z).unwrap().unwrap();
                    assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{f} t={t} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn support_edges() {
        let mp = law(Family::PoissonExp, 0.5);
        assert!((mp.support_left() - 0.085_786_437_626_9).abs() < 1e-10);
        assert!((mp.support_right() - 2.914_213_562_373_1).abs() < 1e-10);
        assert!((mp.predicted_atom() - 0.5).abs() < 1e-15);
        assert_eq!(law(Family::PoissonExp, 2.0).predicted_atom(), 0.0);
        for t in [0.5, 1.0, 2.0] {
            let g = law(Family::Gamma, t);
            assert!((g.support_left() - (1.0 - t + t * t.ln())).abs() < 1e-10, "t={t}");
            let ig = law(Family::InverseGaussian, t);
            assert!((ig.support_left() - (1.0 + t * t) / 2.0).abs() < 1e-10, "t={t}");
            assert!(ig.support_right().is_infinite());
        }
        for alpha in [0.3f64, 0.5, 0.7] {
            let t = 1.3f64;
            let l = law(Family::free_stable(alpha).unwrap(), t);
            let edge = alpha * t * (t * (1.0 - alpha)).powf((1.0 - alpha) / alpha);
            assert!((l.support_left() - edge).abs() < 1e-10, "alpha={alpha}");
        }
    }

    #[test]
    fn real_points_in_the_gap_between_atom_and_support() {
        // Gamma t=1/2: atom at 0, continuous part from 1 − t + t ln t
        let l = law(Family::Gamma, 0.5);
        let x = 0.1;
        let a = l.f_transform(c(x, 0.0)).unwrap();
        let b = l.f_transform(c(x, 1e-9)).unwrap();
        assert!(a.re > 0.0);
        assert!((a - b).norm() < 1e-6);
        assert!(l.f_transform(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn mean_from_far_field() {
        for f in [
            Family::PoissonExp,
            Family::Custom(CbfSpec::new(2.0, 0.0, vec![(0.5, 0.25), (3.0, 1.0)]).unwrap()),
        ] {
            let l = law(f.clone(), 1.5);
            let z = c(0.0, 1e4);
            let g = l.cauchy_transform(z).unwrap();
            let m = (z * (z * g - 1.0)).re;
            assert!(((m - l.mean()) / l.mean()).abs() < 1e-3, "{f}: {m} vs {}", l.mean());
        }
    }
}
