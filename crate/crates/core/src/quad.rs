//! Numerical integration: globally adaptive Gauss–Kronrod (10/21 pair) on
//! finite and semi-infinite ranges, and tanh-sinh for integrands with
//! endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_519_850,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], …, XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a quadrature: value, error estimate and integrand call count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // rounding floor included in `error`
    floor: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv = [0.0f64; 20];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand near x = {}",
                center - dx
            )));
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !fc.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand at x = {center}")));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    err = err.max(floor);
    Ok(Segment {
        a,
        b,
        value,
        error: err,
        floor,
    })
}

/// Globally adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_segments: 2000,
        }
    }

    pub fn with_max_segments(mut self, n: usize) -> Self {
        self.max_segments = n;
        self
    }

    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<Estimate>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate(|x| Ok(f(x)), a, b)
    }

    /// Integrate a fallible integrand; the first integrand error aborts.
    pub fn try_integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<Estimate>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Quadrature(format!(
                "finite limits required, got [{a}, {b}]"
            )));
        }
        let mut evaluations = 21;
        let first = kronrod21(&mut f, a, b)?;
        let mut total = first.value;
        let mut total_err = first.error;
        let mut total_floor = first.floor;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        // requested tolerances below the rounding floor are unattainable
        while total_err > self.abs_tol.max(self.rel_tol * total.abs()).max(2.0 * total_floor) {
            if heap.len() >= self.max_segments {
                return Err(Error::Quadrature(format!(
                    "{} segments on [{a}, {b}], estimate {total:e} ± {total_err:e}",
                    heap.len()
                )));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                return Err(Error::Quadrature(format!(
                    "segment at {mid} cannot be bisected; estimate {total:e} ± {total_err:e}"
                )));
            }
            let left = kronrod21(&mut f, worst.a, mid)?;
            let right = kronrod21(&mut f, mid, worst.b)?;
            evaluations += 42;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            total_floor += left.floor + right.floor - worst.floor;
            heap.push(left);
            heap.push(right);
            // resum to keep the running totals free of cancellation drift
            if heap.len() % 64 == 0 {
                total = heap.iter().map(|s| s.value).sum();
                total_err = heap.iter().map(|s| s.error).sum();
                total_floor = heap.iter().map(|s| s.floor).sum();
            }
        }
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        Ok(Estimate {
            value,
            error,
            evaluations,
        })
    }

    /// ∫ₐ^∞ f via x = a + u/(1 − u).
    pub fn integrate_to_infinity<F>(&self, mut f: F, a: f64) -> Result<Estimate>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate_to_infinity(|x| Ok(f(x)), a)
    }

    pub fn try_integrate_to_infinity<F>(&self, mut f: F, a: f64) -> Result<Estimate>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.try_integrate(
            |u| {
                let v = 1.0 - u;
                let x = a + u / v;
                if x.is_infinite() {
                    return Ok(0.0);
                }
                Ok(f(x)? / (v * v))
            },
            0.0,
            1.0,
        )
    }
}

/// Tanh-sinh (double exponential) quadrature on [a, b]. The integrand is
/// called with points strictly inside the interval, so integrable endpoint
/// singularities are fine. Nodes near `a` are resolved to full precision;
/// near `b` they stop at one ulp of `b`, so put the stronger singularity at `a`.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    use std::f64::consts::FRAC_PI_2;
    const MAX_LEVEL: usize = 10;
    const T_MAX: f64 = 4.5;

    let half = 0.5 * (b - a);
    let mut evaluations = 0;
    // node at parameter t contributes w(t) f(x(t))
    let mut eval = |t: f64, evaluations: &mut usize| -> Result<f64> {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        // distance from the nearer endpoint, computed without cancellation
        let e = (-2.0 * u.abs()).exp();
        let offset = 2.0 * half * e / (1.0 + e);
        let x = if u < 0.0 { a + offset } else { b - offset };
        if x <= a.min(b) || x >= a.max(b) || w == 0.0 {
            return Ok(0.0);
        }
        *evaluations += 1;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand at x = {x}")));
        }
        Ok(w * v)
    };

    let mut h = 0.5;
    let mut sum = eval(0.0, &mut evaluations)?;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += eval(t, &mut evaluations)? + eval(-t, &mut evaluations)?;
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 1..MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += eval(t, &mut evaluations)? + eval(-t, &mut evaluations)?;
            k += 2;
        }
        let value = sum * h;
        let error = (value - prev).abs();
        if error <= tol.max(4.0 * f64::EPSILON * value.abs()) {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        prev = value;
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh did not reach {tol:e} on [{a}, {b}]"
    )))
}
