//! Stieltjes inversion: densities and atom masses from boundary values of G.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::FreeLaw;
use crate::error::{Error, Result};

pub const DEFAULT_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Polynomial extrapolation of (yᵢ, vᵢ) to y = 0.
fn extrapolate_to_zero(ys: &[f64], vals: &[f64]) -> f64 {
    let mut total = 0.0;
    for (k, (&yk, &vk)) in ys.iter().zip(vals).enumerate() {
        let mut weight = 1.0;
        for (j, &yj) in ys.iter().enumerate() {
            if j != k {
                weight *= yj / (yj - yk);
            }
        }
        total += weight * vk;
    }
    total
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 2 {
        return Err(Error::domain("stieltjes", "ladder needs at least two heights"));
    }
    if !ladder.iter().all(|&y| y > 0.0 && y.is_finite()) {
        return Err(Error::domain("stieltjes", "ladder heights must be positive"));
    }
    if !ladder.windows(2).all(|p| p[1] < p[0]) {
        return Err(Error::domain("stieltjes", "ladder must be strictly decreasing"));
    }
    Ok(())
}

impl FreeLaw {
    /// Extrapolated limit of −Im G(x + iy)/π as y → 0 along the ladder.
    pub fn stieltjes_density(&self, x: f64, ladder: &[f64]) -> Result<f64> {
        check_ladder(ladder)?;
        let vals = ladder
            .iter()
            .map(|&y| Ok(-self.cauchy_transform(Complex64::new(x, y))?.im / PI))
            .collect::<Result<Vec<_>>>()?;
        let d0 = extrapolate_to_zero(ladder, &vals);
        let diffs: Vec<f64> = vals.windows(2).map(|p| (p[0] - p[1]).abs()).collect();
        let growing = diffs.windows(2).any(|d| d[1] > d[0] && d[1] > 1e-8);
        if growing {
            return Err(Error::Extrapolation(format!(
                "ladder at x = {x} does not settle: values {vals:?}, limit {d0:.3e}"
            )));
        }
        Ok(d0.max(0.0))
    }

    /// Mass of an atom at p from −y Im G(p + iy) along the ladder. The
    /// limit is taken in √y, which also covers the √y decay found where a
    /// 1/√x density edge sits at p.
    pub fn atom_mass(&self, p: f64, ladder: &[f64]) -> Result<f64> {
        check_ladder(ladder)?;
        let vals = ladder
            .iter()
            .map(|&y| Ok(-y * self.cauchy_transform(Complex64::new(p, y))?.im))
            .collect::<Result<Vec<_>>>()?;
        let roots: Vec<f64> = ladder.iter().map(|y| y.sqrt()).collect();
        let m0 = extrapolate_to_zero(&roots, &vals);
        let k = roots.len() - 2;
        let m_pair = extrapolate_to_zero(&roots[k..], &vals[k..]);
        if (m0 - m_pair).abs() > 1e-4 {
            return Err(Error::Extrapolation(format!(
                "atom ladder at {p} has not settled: {m_pair:.6} vs limit {m0:.6}"
            )));
        }
        Ok(m0.max(0.0))
    }
}
