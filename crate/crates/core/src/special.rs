//! Special functions needed by the closed-form families: log-gamma and its
//! reciprocal, the lower incomplete gamma function, the modified Bessel
//! function I₁, the lower real branch W₋₁ of Lambert's function and erfc.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// ζ(k) − 1 for k = 2..=30.
const ZETA_MINUS_ONE: [f64; 29] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_961e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
];

/// Stirling coefficients B₂ₖ / (2k(2k−1)).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn check_finite(func: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("non-finite argument {x}")))
    }
}

/// Σ_{k≥2} (−1)^k (ζ(k)−1) εᵏ / k, valid for |ε| ≤ 1/2.
fn zeta_tail(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -eps;
    for (i, z) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        // pow = (−ε)^k
        sum += z * pow / k;
    }
    sum
}

pub(crate) fn ln_gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // ln Γ(x) = ln Γ(x + 1) − ln x
        return ln_gamma_positive(x + 1.0) - x.ln();
    }
    if x < 1.5 {
        let eps = x - 1.0;
        return -eps.ln_1p() + eps * (1.0 - EULER_GAMMA) + zeta_tail(eps);
    }
    if x < 2.5 {
        let d = x - 2.0;
        return d * (1.0 - EULER_GAMMA) + zeta_tail(d);
    }
    if x < 10.0 {
        let mut shifted = x;
        let mut prod = 1.0;
        while shifted < 10.0 {
            prod *= shifted;
            shifted += 1.0;
        }
        return stirling(shifted) - prod.ln();
    }
    stirling(x)
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Natural logarithm of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_finite("ln_gamma", x)?;
    if x <= 0.0 {
        return Err(Error::domain("ln_gamma", format!("x = {x} must be positive")));
    }
    Ok(ln_gamma_positive(x))
}

/// sin(πx) with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    // r in (0, 2): reduce to (−1/2, 1/2] around the nearest half-turn
    if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (0.5 - r)).cos()
    } else if r <= 1.25 {
        (PI * (1.0 - r)).sin()
    } else if r <= 1.75 {
        -(PI * (1.5 - r)).cos()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// 1/Γ(x) on the whole real line; exactly zero at 0, −1, −2, ….
pub fn gamma_reciprocal(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 {
        if x < 0.5 {
            return x * (-ln_gamma_positive(x + 1.0)).exp();
        }
        return (-ln_gamma_positive(x)).exp();
    }
    if x == x.floor() {
        return 0.0;
    }
    // reflection: 1/Γ(x) = Γ(1 − x) sin(πx) / π
    let s = sin_pi(x);
    s.signum() * (ln_gamma_positive(1.0 - x) + (s.abs() / PI).ln()).exp()
}

/// log|1/Γ(x)| and the sign of 1/Γ(x). Returns `None` at the poles of Γ.
pub(crate) fn ln_abs_gamma_reciprocal(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((-ln_gamma_positive(x), 1.0));
    }
    if x == x.floor() {
        return None;
    }
    let s = sin_pi(x);
    Some((ln_gamma_positive(1.0 - x) + (s.abs() / PI).ln(), s.signum()))
}

const INC_GAMMA_MAX_ITER: usize = 10_000;
const INC_GAMMA_EPS: f64 = 1e-15;

/// Ascending series Σ xⁿ / (a(a+1)…(a+n)); multiply by xᵃe⁻ˣ to get γ(a, x).
fn inc_gamma_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..INC_GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * INC_GAMMA_EPS {
            return Ok(sum);
        }
    }
    Err(Error::SeriesDivergence(format!(
        "incomplete gamma series at a = {a}, x = {x}"
    )))
}

/// Continued fraction for Γ(a, x) / (xᵃ e⁻ˣ), modified Lentz.
fn inc_gamma_cf(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..INC_GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < INC_GAMMA_EPS {
            return Ok(h);
        }
    }
    Err(Error::SeriesDivergence(format!(
        "incomplete gamma continued fraction at a = {a}, x = {x}"
    )))
}

fn check_inc_gamma_args(func: &'static str, a: f64, x: f64) -> Result<()> {
    check_finite(func, a)?;
    if x.is_nan() {
        return Err(Error::domain(func, "x is NaN"));
    }
    if a <= 0.0 {
        return Err(Error::domain(func, format!("a = {a} must be positive")));
    }
    if x < 0.0 {
        return Err(Error::domain(func, format!("x = {x} must be nonnegative")));
    }
    Ok(())
}

/// Regularized pair (P(a, x), Q(a, x)) with P + Q = 1.
pub fn regularized_gamma(a: f64, x: f64) -> Result<(f64, f64)> {
    check_inc_gamma_args("regularized_gamma", a, x)?;
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let ln_prefactor = a * x.ln() - x - ln_gamma_positive(a);
    if x < a + 1.0 {
        let p = (ln_prefactor.exp() * inc_gamma_series(a, x)?).min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = (ln_prefactor.exp() * inc_gamma_cf(a, x)?).min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Lower incomplete gamma γ(a, x) = ∫₀ˣ uᵃ⁻¹ e⁻ᵘ du.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check_inc_gamma_args("lower_incomplete_gamma", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(ln_gamma_positive(a).exp());
    }
    if x < a + 1.0 {
        Ok((a * x.ln() - x).exp() * inc_gamma_series(a, x)?)
    } else {
        let upper = (a * x.ln() - x).exp() * inc_gamma_cf(a, x)?;
        Ok(ln_gamma_positive(a).exp() - upper)
    }
}

/// Ascending series for I₁; accurate for every x ≥ 0 but used below 30.
pub fn bessel_i1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

/// e⁻ˣ I₁(x) from the large-argument expansion.
pub fn bessel_i1_asymptotic_scaled(x: f64) -> f64 {
    // coefficients (4ν² − (2k−1)²) / (8k) with ν = 1, alternating sign
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kk = k as f64;
        let odd = 2.0 * kk - 1.0;
        term *= -(4.0 - odd * odd) / (8.0 * kk * x);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

const I1_CROSSOVER: f64 = 30.0;

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check_finite("bessel_i1", x)?;
    if x < 0.0 {
        return Err(Error::domain("bessel_i1", format!("x = {x} must be nonnegative")));
    }
    if x <= I1_CROSSOVER {
        Ok(bessel_i1_series(x))
    } else {
        Ok(bessel_i1_asymptotic_scaled(x) * x.exp())
    }
}

/// e⁻ˣ I₁(x), finite for every x ≥ 0.
pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    check_finite("bessel_i1_scaled", x)?;
    if x < 0.0 {
        return Err(Error::domain(
            "bessel_i1_scaled",
            format!("x = {x} must be nonnegative"),
        ));
    }
    if x <= I1_CROSSOVER {
        Ok(bessel_i1_series(x) * (-x).exp())
    } else {
        Ok(bessel_i1_asymptotic_scaled(x))
    }
}

/// Lower real branch of Lambert's W on [−1/e, 0), values ≤ −1.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    check_finite("lambert_w_minus1", x)?;
    let branch = -1.0 / E;
    // one ulp of slack so that -1/e computed in floating point is accepted
    if x < branch - 4.0 * f64::EPSILON * branch.abs() || x >= 0.0 {
        return Err(Error::domain(
            "lambert_w_minus1",
            format!("x = {x} outside [-1/e, 0)"),
        ));
    }
    let q = 1.0 + E * x;
    if q <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = if x < -0.25 {
        // expansion about the branch point in p = −√(2(1 + e x))
        let p = -(2.0 * q).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = (w - step).min(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * w.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// Scaled complementary error function eˣ² erfc(x) for x ≥ 0.
pub fn erfcx_nonneg(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1.5 {
        return x2.exp() * (1.0 - erf_series(x));
    }
    // Γ(1/2, x²) = e^{−x²} x h with h from the Legendre continued fraction
    match inc_gamma_cf(0.5, x2) {
        Ok(h) => x * h / SQRT_PI,
        Err(_) => 1.0 / (SQRT_PI * x),
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = (2/√π) e^{−x²} Σ 2ⁿ x^{2n+1} / (1·3·…·(2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term <= sum.abs() * 1e-17 {
            break;
        }
    }
    2.0 / SQRT_PI * (-x2).exp() * sum
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let x2 = x * x;
    if x2 < 1.5 {
        return 1.0 - erf_series(x);
    }
    if x > 27.3 {
        return 0.0;
    }
    (-x2).exp() * erfcx_nonneg(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
