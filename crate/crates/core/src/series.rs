//! Guarded summation of the alternating stable-type power series.
//!
//! Terms are supplied in log form so that factorials and gamma values never
//! overflow. A term-free envelope `E_n ≥ |T_n|` drives the ratio guard and the
//! tail bound; a rounding estimate rejects sums dominated by cancellation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation policy for the stable-type series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableSeriesControl {
    pub max_terms: usize,
    /// Absolute bound on the neglected tail.
    pub tail_tol: f64,
    /// Arguments x = t·w^{−α̃} above this are refused without summing.
    pub asymptotic_switch: f64,
    /// Largest accepted rounding error estimate, relative to max(1, |sum|).
    pub rounding_tol: f64,
}

impl Default for StableSeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 400,
            tail_tol: 1e-15,
            asymptotic_switch: 64.0,
            rounding_tol: 1e-10,
        }
    }
}

impl StableSeriesControl {
    pub fn new(
        max_terms: usize,
        tail_tol: f64,
        asymptotic_switch: f64,
        rounding_tol: f64,
    ) -> Result<Self> {
        if max_terms == 0 || max_terms > 400 {
            return Err(Error::InvalidSpec(format!("max_terms = {max_terms} not in 1..=400")));
        }
        if !(tail_tol >= 1e-15 && tail_tol.is_finite()) {
            return Err(Error::InvalidSpec(format!("tail_tol = {tail_tol} below 1e-15")));
        }
        if !(asymptotic_switch > 0.0) {
            return Err(Error::InvalidSpec("asymptotic_switch must be positive".into()));
        }
        if !(rounding_tol > 0.0 && rounding_tol.is_finite()) {
            return Err(Error::InvalidSpec("rounding_tol must be positive".into()));
        }
        Ok(Self {
            max_terms,
            tail_tol,
            asymptotic_switch,
            rounding_tol,
        })
    }
}

/// One series term as ln|T|, its sign (0 for a vanishing term) and the sum of
/// the magnitudes of the logarithms that went into ln|T|.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogTerm {
    pub ln_abs: f64,
    pub sign: f64,
    pub scale: f64,
}

impl LogTerm {
    pub const ZERO: LogTerm = LogTerm {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
        scale: 0.0,
    };
}

pub(crate) fn guarded_sum(
    control: &StableSeriesControl,
    what: &str,
    start: usize,
    term: impl Fn(usize) -> LogTerm,
    ln_envelope: impl Fn(usize) -> f64,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut rounding = 0.0;
    let mut ratio_reached = false;
    let mut prev_ratio = f64::INFINITY;
    for n in start..start + control.max_terms {
        let t = term(n);
        if t.sign != 0.0 {
            let mag = t.ln_abs.exp();
            sum += t.sign * mag;
            rounding += mag * f64::EPSILON * (4.0 + t.scale);
        }
        let e_now = ln_envelope(n);
        let e_next = ln_envelope(n + 1);
        let ratio = (e_next - e_now).exp();
        if ratio < 0.9 {
            ratio_reached = true;
        }
        if ratio_reached && ratio < 0.9 && ratio <= prev_ratio {
            let tail = e_next.exp() / (1.0 - ratio);
            if tail <= control.tail_tol {
                if rounding > control.rounding_tol * sum.abs().max(1.0) {
                    return Err(Error::SeriesDivergence(format!(
                        "{what}: cancellation error {rounding:.3e} exceeds tolerance"
                    )));
                }
                return Ok(sum);
            }
        }
        prev_ratio = ratio;
    }
    Err(Error::SeriesDivergence(format!(
        "{what}: tail above {:.1e} after {} terms",
        control.tail_tol, control.max_terms
    )))
}
