//! Monte Carlo for the first-passage process of X_s = s − Y_s.
//!
//! Paths are piecewise linear in s: compound Poisson paths exactly, the
//! other families through linear interpolation between exact grid values.
//! With S(s) = sup_{r ≤ s} X_r one has τ_y ≤ s ⇔ S(s) ≥ y, so the renewal
//! function is U[0, s] = E S(s) and Kendall cells reduce to overlaps of
//! [y_lo, y_hi] with (S(s_lo), S(s_hi)].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::cbf::Family;
use crate::classical::{sample_increment, ClassicalLaw};
use crate::error::{Error, Result};
use crate::quad::Integrator;
use crate::report::sig17;

pub const DEFAULT_SEED: u64 = 0x5EED_F00D;
pub const DEFAULT_STEP: f64 = 1e-3;
const BLOCK: usize = 1000;
const MIN_HITS: u64 = 50;

/// A simulated path of Y on [0, horizon].
#[derive(Debug, Clone, PartialEq)]
pub enum PathSample {
    Jumps {
        jump_times: Vec<f64>,
        jump_sizes: Vec<f64>,
        horizon: f64,
    },
    Grid {
        step: f64,
        increments: Vec<f64>,
    },
}

/// X(s) = x0 + slope (s − s0) on [s0, s1).
#[derive(Debug, Clone, Copy)]
struct Piece {
    s0: f64,
    s1: f64,
    x0: f64,
    slope: f64,
}

impl Piece {
    fn at(&self, s: f64) -> f64 {
        self.x0 + self.slope * (s - self.s0)
    }
}

impl PathSample {
    pub fn horizon(&self) -> f64 {
        match self {
            PathSample::Jumps { horizon, .. } => *horizon,
            PathSample::Grid { step, increments } => *step * increments.len() as f64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.horizon() == 0.0
    }

    fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        let (jumps, grid) = match self {
            PathSample::Jumps { jump_times, jump_sizes, horizon } => {
                let mut out = Vec::with_capacity(jump_times.len() + 1);
                let mut s0 = 0.0;
                let mut y = 0.0;
                for (&tj, &size) in jump_times.iter().zip(jump_sizes) {
                    out.push(Piece { s0, s1: tj, x0: s0 - y, slope: 1.0 });
                    y += size;
                    s0 = tj;
                }
                if s0 < *horizon {
                    out.push(Piece { s0, s1: *horizon, x0: s0 - y, slope: 1.0 });
                }
                (Some(out.into_iter()), None)
            }
            PathSample::Grid { step, increments } => {
                let h = *step;
                let mut x = 0.0;
                let it = increments.iter().enumerate().map(move |(k, &dy)| {
                    let s0 = k as f64 * h;
                    let p = Piece { s0, s1: s0 + h, x0: x, slope: (h - dy) / h };
                    x += h - dy;
                    p
                });
                (None, Some(it))
            }
        };
        jumps.into_iter().flatten().chain(grid.into_iter().flatten())
    }

    /// τ_y = inf{s : X_s ≥ y}; infinite when not reached by the horizon.
    pub fn first_passage(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        for p in self.pieces() {
            if p.slope > 0.0 && p.at(p.s1) >= y && p.x0 < y {
                return p.s0 + (y - p.x0) / p.slope;
            }
        }
        f64::INFINITY
    }

    /// Running supremum S at each of the sorted times `ss`.
    pub fn sup_at(&self, ss: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(ss.len());
        let mut m = 0.0f64;
        let mut next = 0;
        for p in self.pieces() {
            while next < ss.len() && ss[next] < p.s1 {
                let s = ss[next].max(p.s0);
                out.push(if p.slope > 0.0 { m.max(p.at(s)) } else { m });
                next += 1;
            }
            if next == ss.len() {
                return out;
            }
            if p.slope > 0.0 {
                m = m.max(p.at(p.s1));
            }
        }
        out.resize(ss.len(), m);
        out
    }

    /// ∫_{(a, b]} e^{−κs} dS(s).
    pub fn weighted_rise(&self, a: f64, b: f64, kappa: f64) -> f64 {
        let mut m = 0.0f64;
        let mut total = 0.0;
        for p in self.pieces() {
            if p.s0 >= b {
                break;
            }
            if p.slope > 0.0 {
                let end = p.at(p.s1);
                if end > m {
                    let start = (p.s0 + (m - p.x0) / p.slope).max(p.s0);
                    let (u, v) = (start.max(a), p.s1.min(b));
                    if v > u {
                        total += p.slope
                            * if kappa == 0.0 {
                                v - u
                            } else {
                                ((-kappa * u).exp() - (-kappa * v).exp()) / kappa
                            };
                    }
                    m = end;
                }
            }
        }
        total
    }

    /// ∫ (X_s / s) 1{X_s ∈ [y_lo, y_hi]} ds over s ∈ [s_lo, s_hi].
    fn occupation(&self, cell: &Cell) -> f64 {
        let mut total = 0.0;
        for p in self.pieces() {
            if p.s0 >= cell.s_hi {
                break;
            }
            let (mut u, mut v) = (p.s0.max(cell.s_lo), p.s1.min(cell.s_hi));
            if v <= u {
                continue;
            }
            if p.slope == 0.0 {
                if p.x0 >= cell.y_lo && p.x0 <= cell.y_hi {
                    total += p.x0 * (v / u).ln();
                }
                continue;
            }
            let s_of = |y: f64| p.s0 + (y - p.x0) / p.slope;
            let (e1, e2) = if p.slope > 0.0 {
                (s_of(cell.y_lo), s_of(cell.y_hi))
            } else {
                (s_of(cell.y_hi), s_of(cell.y_lo))
            };
            u = u.max(e1);
            v = v.min(e2);
            if v > u {
                let a = p.x0 - p.slope * p.s0;
                total += a * (v / u).ln() + p.slope * (v - u);
            }
        }
        total
    }

    /// The same path observed on a grid of twice the step.
    pub fn coarsen(&self) -> Option<PathSample> {
        match self {
            PathSample::Grid { step, increments } => Some(PathSample::Grid {
                step: 2.0 * step,
                increments: increments.chunks(2).map(|c| c.iter().sum()).collect(),
            }),
            PathSample::Jumps { .. } => None,
        }
    }
}

/// Draw a path of Y up to the horizon. Compound Poisson paths are exact;
/// the other families use exact increments on a grid of the given step.
/// The inverse Gaussian family is simulated without its killing term.
pub fn simulate_path<R: Rng + ?Sized>(
    family: &Family,
    horizon: f64,
    step: f64,
    rng: &mut R,
) -> Result<PathSample> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::domain("simulate_path", format!("horizon = {horizon}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain("simulate_path", format!("step = {step}")));
    }
    match family {
        Family::Custom(_) => Err(Error::Unsupported("simulate_path")),
        Family::PoissonExp => {
            let mut jump_times = Vec::new();
            let mut jump_sizes = Vec::new();
            let mut s: f64 = Exp1.sample(rng);
            while s < horizon {
                jump_times.push(s);
                jump_sizes.push(<Exp1 as Distribution<f64>>::sample(&Exp1, rng));
                s += <Exp1 as Distribution<f64>>::sample(&Exp1, rng);
            }
            Ok(PathSample::Jumps { jump_times, jump_sizes, horizon })
        }
        _ => {
            let n = (horizon / step - 1e-9).ceil().max(0.0) as usize;
            let increments = (0..n)
                .map(|_| sample_increment(family, step, rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(PathSample::Grid { step, increments })
        }
    }
}

/// A rectangle s ∈ [s_lo, s_hi], y ∈ [y_lo, y_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub s_lo: f64,
    pub s_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Cell {
    pub fn new(s: (f64, f64), y: (f64, f64)) -> Result<Self> {
        if !(s.0 > 0.0 && s.1 > s.0 && y.0 > 0.0 && y.1 > y.0) {
            return Err(Error::domain(
                "kendall_check",
                format!("cell s={s:?} y={y:?} must be a proper rectangle away from 0"),
            ));
        }
        Ok(Self { s_lo: s.0, s_hi: s.1, y_lo: y.0, y_hi: y.1 })
    }

    /// E|[y_lo, y_hi] ∩ (S(s_lo), S(s_hi)]| per path.
    fn passage_mass(&self, sup_lo: f64, sup_hi: f64) -> f64 {
        (sup_hi.min(self.y_hi) - sup_lo.max(self.y_lo)).max(0.0)
    }
}

/// Both sides of Kendall's identity integrated over one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KendallCell {
    #[serde(serialize_with = "sig17")]
    pub s_lo: f64,
    #[serde(serialize_with = "sig17")]
    pub s_hi: f64,
    #[serde(serialize_with = "sig17")]
    pub y_lo: f64,
    #[serde(serialize_with = "sig17")]
    pub y_hi: f64,
    #[serde(serialize_with = "sig17")]
    pub lhs: f64,
    #[serde(serialize_with = "sig17")]
    pub rhs: f64,
    #[serde(serialize_with = "sig17")]
    pub stderr: f64,
    /// Change of the two sides' difference when the grid step is doubled.
    #[serde(serialize_with = "sig17")]
    pub grid_shift: f64,
    /// |grid_shift| below a third of the standard error.
    pub bias_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalPoint {
    #[serde(serialize_with = "sig17")]
    pub s: f64,
    #[serde(serialize_with = "sig17")]
    pub u_hat: f64,
    #[serde(serialize_with = "sig17")]
    pub stderr: f64,
    #[serde(serialize_with = "sig17")]
    pub u_formula: f64,
    #[serde(serialize_with = "sig17")]
    pub grid_shift: f64,
    pub bias_ok: bool,
    pub pass: bool,
}

/// Binned Monte Carlo estimate of the renewal density.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalEstimate {
    pub s_grid: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub half_width: f64,
    /// Change of each estimate when the grid step is doubled (0 for exact paths).
    pub grid_shift: Vec<f64>,
    /// Set when more than 1e-3 of the paths reach y_max before the last bin.
    pub tail_warning: bool,
}

/// Sums of per-path statistics, merged in block order.
#[derive(Debug, Clone)]
struct Moments {
    n: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    hits: Vec<u64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self { n: 0, sum: vec![0.0; k], sum_sq: vec![0.0; k], hits: vec![0; k] }
    }

    fn push(&mut self, v: &[f64]) {
        self.n += 1;
        for (i, &x) in v.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
            if x != 0.0 {
                self.hits[i] += 1;
            }
        }
    }

    fn merge(mut self, other: Moments) -> Self {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
            self.hits[i] += other.hits[i];
        }
        self
    }

    fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.n as f64
    }

    fn stderr(&self, i: usize) -> f64 {
        let n = self.n as f64;
        let m = self.mean(i);
        let var = ((self.sum_sq[i] / n - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Simulate `n_paths` paths in blocks with one ChaCha stream per block and
/// accumulate the statistics returned by `stats`.
fn run_paths<F>(
    family: &Family,
    horizon: f64,
    step: f64,
    n_paths: usize,
    seed: u64,
    k: usize,
    stats: F,
) -> Result<Moments>
where
    F: Fn(&PathSample, &mut Vec<f64>) + Sync,
{
    let blocks = n_paths.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Moments> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(n_paths - b * BLOCK);
            let mut m = Moments::new(k);
            let mut v = Vec::with_capacity(k);
            for _ in 0..count {
                let path = simulate_path(family, horizon, step, &mut rng)?;
                v.clear();
                stats(&path, &mut v);
                m.push(&v);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Moments::new(k), Moments::merge))
}

/// Configuration of a combined Kendall / renewal run.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallConfig {
    pub cells: Vec<Cell>,
    pub s_grid: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub step: f64,
    pub half_width: f64,
}

impl KendallConfig {
    /// Four cells away from the origin and the renewal points 0.5, 1, 2.
    pub fn standard(n_paths: usize, seed: u64) -> Self {
        let cell = |s: (f64, f64), y: (f64, f64)| Cell::new(s, y).expect("valid cell");
        Self {
            cells: vec![
                cell((1.0, 2.0), (0.5, 1.0)),
                cell((1.0, 2.0), (0.25, 0.75)),
                cell((0.5, 1.0), (0.1, 0.4)),
                cell((1.5, 3.0), (0.5, 1.5)),
            ],
            s_grid: vec![0.5, 1.0, 2.0],
            n_paths,
            seed,
            step: DEFAULT_STEP,
            half_width: 0.05,
        }
    }
}

/// JSON report of a Kendall / renewal run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KendallReport {
    pub family: String,
    pub seed: u64,
    pub n_paths: usize,
    #[serde(serialize_with = "sig17")]
    pub step: f64,
    pub cells: Vec<KendallCell>,
    pub u: Vec<RenewalPoint>,
}

impl KendallReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass) && self.u.iter().all(|u| u.pass)
    }
}

fn path_stats(
    path: &PathSample,
    cells: &[Cell],
    bins: &[(f64, f64)],
    kappa: f64,
    times: &[f64],
    order: &[usize],
    out: &mut Vec<f64>,
) {
    let sorted = path.sup_at(times);
    let mut sups = vec![0.0; times.len()];
    for (i, &j) in order.iter().enumerate() {
        sups[j] = sorted[i];
    }
    for (i, cell) in cells.iter().enumerate() {
        let lhs = cell.passage_mass(sups[2 * i], sups[2 * i + 1]);
        let rhs = path.occupation(cell);
        out.push(lhs);
        out.push(rhs);
    }
    let base = 2 * cells.len();
    for (i, &(a, b)) in bins.iter().enumerate() {
        let rise = if kappa == 0.0 {
            sups[base + 2 * i + 1] - sups[base + 2 * i]
        } else {
            path.weighted_rise(a, b, kappa)
        };
        out.push(rise / (b - a));
    }
}

/// Run all Kendall cells and renewal bins of `config` on one set of paths.
pub fn kendall_suite(family: &Family, config: &KendallConfig) -> Result<KendallReport> {
    if config.n_paths == 0 {
        return Err(Error::EmptyEstimate("no paths requested".into()));
    }
    let kappa = family.killing();
    let bins: Vec<(f64, f64)> = config
        .s_grid
        .iter()
        .map(|&s| (s - config.half_width, s + config.half_width))
        .collect();
    if bins.iter().any(|&(a, _)| !(a > 0.0)) {
        return Err(Error::domain("renewal_mc", "bins must lie in s > 0"));
    }
    let mut times = Vec::new();
    for c in &config.cells {
        times.push(c.s_lo);
        times.push(c.s_hi);
    }
    for &(a, b) in &bins {
        times.push(a);
        times.push(b);
    }
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();

    let per = 2 * config.cells.len() + bins.len();
    let grid = !matches!(family, Family::PoissonExp);
    let k = if grid { 2 * per } else { per };
    let moments = run_paths(family, horizon, config.step, config.n_paths, config.seed, k, |path, out| {
        path_stats(path, &config.cells, &bins, kappa, &sorted, &order, out);
        if let Some(coarse) = path.coarsen() {
            let mut fine = out.clone();
            let mut c = Vec::with_capacity(per);
            path_stats(&coarse, &config.cells, &bins, kappa, &sorted, &order, &mut c);
            // differences between the two resolutions, paired per path
            for (f, cv) in fine.iter_mut().zip(&c) {
                *f = cv - *f;
            }
            out.extend(fine);
        }
    })?;

    let mut cells = Vec::with_capacity(config.cells.len());
    for (i, cell) in config.cells.iter().enumerate() {
        let (li, ri) = (2 * i, 2 * i + 1);
        if moments.hits[li] < MIN_HITS || moments.hits[ri] < MIN_HITS {
            return Err(Error::DegenerateCell(format!(
                "cell {cell:?} has {} / {} contributing paths",
                moments.hits[li], moments.hits[ri]
            )));
        }
        let lhs = moments.mean(li);
        let rhs = moments.mean(ri);
        let stderr = moments.stderr(li).hypot(moments.stderr(ri));
        let grid_shift = if grid { moments.mean(per + li) - moments.mean(per + ri) } else { 0.0 };
        let bias_ok = grid_shift.abs() <= stderr / 3.0;
        cells.push(KendallCell {
            s_lo: cell.s_lo,
            s_hi: cell.s_hi,
            y_lo: cell.y_lo,
            y_hi: cell.y_hi,
            lhs,
            rhs,
            stderr,
            grid_shift,
            bias_ok,
            pass: bias_ok && (lhs - rhs).abs() <= 3.0 * stderr,
        });
    }
    let mut u = Vec::with_capacity(bins.len());
    for (i, (&s, &(a, b))) in config.s_grid.iter().zip(&bins).enumerate() {
        let j = 2 * config.cells.len() + i;
        let u_hat = moments.mean(j);
        let stderr = moments.stderr(j);
        let u_formula = Integrator::new(1e-11, 1e-9)
            .try_integrate(|x| renewal_density_formula(family, x), a, b)?
            .value
            / (b - a);
        let grid_shift = if grid { moments.mean(per + j) } else { 0.0 };
        let bias_ok = grid_shift.abs() <= stderr / 3.0;
        u.push(RenewalPoint {
            s,
            u_hat,
            stderr,
            u_formula,
            grid_shift,
            bias_ok,
            pass: bias_ok && (u_hat - u_formula).abs() <= 3.0 * stderr,
        });
    }
    Ok(KendallReport {
        family: family.to_string(),
        seed: config.seed,
        n_paths: config.n_paths,
        step: config.step,
        cells,
        u,
    })
}

/// Both sides of P(τ_y ∈ ds) dy = (y/s) P(X_s ∈ dy) ds over one cell.
pub fn kendall_check(family: &Family, cell: Cell, n_paths: usize, seed: u64) -> Result<KendallCell> {
    if n_paths < 10_000 {
        return Err(Error::domain("kendall_check", format!("n_paths = {n_paths} below 10^4")));
    }
    let config = KendallConfig {
        cells: vec![cell],
        s_grid: vec![],
        n_paths,
        seed,
        step: DEFAULT_STEP,
        half_width: 0.05,
    };
    Ok(kendall_suite(family, &config)?.cells.remove(0))
}

/// u(s) = (1/s) ∫₀^s ν^{*s}[0, y] dy.
pub fn renewal_density_formula(family: &Family, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("renewal_density_formula", format!("s = {s}")));
    }
    let law = ClassicalLaw::new(family.clone(), s)?;
    crate::duality::average_cdf(&law, s)
}

/// Histogram estimate of the renewal density on bins of half-width 0.05.
pub fn renewal_mc(
    family: &Family,
    s_grid: &[f64],
    n_paths: usize,
    y_max: f64,
    seed: u64,
) -> Result<RenewalEstimate> {
    if n_paths == 0 {
        return Err(Error::EmptyEstimate("no paths requested".into()));
    }
    let half_width = 0.05;
    let kappa = family.killing();
    let bins: Vec<(f64, f64)> = s_grid.iter().map(|&s| (s - half_width, s + half_width)).collect();
    if bins.iter().any(|&(a, _)| !(a > 0.0)) {
        return Err(Error::domain("renewal_mc", "bins must lie in s > 0"));
    }
    let horizon = bins.iter().map(|b| b.1).fold(0.0, f64::max);
    let nb = bins.len();
    let grid = !matches!(family, Family::PoissonExp);
    let k = if grid { 2 * nb + 1 } else { nb + 1 };
    let step = DEFAULT_STEP;
    let moments = run_paths(family, horizon, step, n_paths, seed, k, |path, out| {
        let est = |p: &PathSample, out: &mut Vec<f64>| {
            for &(a, b) in &bins {
                let rise = if kappa == 0.0 {
                    let s = p.sup_at(&[a, b]);
                    s[1].min(y_max) - s[0].min(y_max)
                } else {
                    p.weighted_rise(a, b, kappa)
                };
                out.push(rise / (b - a));
            }
        };
        est(path, out);
        let top = path.sup_at(&[horizon])[0];
        out.push(if top >= y_max { 1.0 } else { 0.0 });
        if let Some(coarse) = path.coarsen() {
            let mut c = Vec::with_capacity(nb);
            est(&coarse, &mut c);
            for i in 0..nb {
                out.push(c[i] - out[i]);
            }
        }
    })?;
    Ok(RenewalEstimate {
        s_grid: s_grid.to_vec(),
        u_hat: (0..nb).map(|i| moments.mean(i)).collect(),
        std_err: (0..nb).map(|i| moments.stderr(i)).collect(),
        n_paths,
        seed,
        half_width,
        grid_shift: (0..nb).map(|i| if grid { moments.mean(nb + 1 + i) } else { 0.0 }).collect(),
        tail_warning: moments.mean(nb) > 1e-3,
    })
}

/// Root ψ(z) of ψ − f(ψ) = z on the branch where ψ − f(ψ) increases.
pub fn psi_root(family: &Family, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::domain("psi_root", format!("z = {z}")));
    }
    let g = |p: f64| -> Result<f64> { Ok(p - family.eval_real(p)? - z) };
    // start right of the minimiser of p − f(p), where f′(p) = 1
    let mut lo = 0.0;
    if family.slope_at_zero() > 1.0 {
        let mut hi = 1.0;
        while family.derivative(num_complex::Complex64::new(hi, 0.0)).re > 1.0 {
            hi *= 2.0;
        }
        let mut a = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (a + hi);
            if family.derivative(num_complex::Complex64::new(mid, 0.0)).re > 1.0 {
                a = mid;
            } else {
                hi = mid;
            }
        }
        lo = hi;
    }
    let mut hi = lo + z + 1.0;
    while g(hi)? < 0.0 {
        hi = 2.0 * hi + 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monte Carlo check of ψ̂ − f(ψ̂) = z with ψ̂ = −ln Ê e^{−zτ₁}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiCheck {
    pub z: f64,
    pub psi_hat: f64,
    pub residual: f64,
    pub stderr: f64,
    pub pass: bool,
}

pub fn psi_mc(
    family: &Family,
    zs: &[f64],
    n_paths: usize,
    seed: u64,
    horizon: f64,
    step: f64,
) -> Result<Vec<PsiCheck>> {
    if n_paths < 2 {
        return Err(Error::EmptyEstimate("need at least two paths".into()));
    }
    let kappa = family.killing();
    let moments = run_paths(family, horizon, step, n_paths, seed, zs.len(), |path, out| {
        let tau = path.first_passage(1.0);
        for &z in zs {
            out.push(if tau.is_finite() { (-(z + kappa) * tau).exp() } else { 0.0 });
        }
    })?;
    zs.iter()
        .enumerate()
        .map(|(i, &z)| {
            let e = moments.mean(i);
            if !(e > 0.0) {
                return Err(Error::EmptyEstimate(format!("no passages contributed at z = {z}")));
            }
            let psi = -e.ln();
            let se_psi = moments.stderr(i) / e;
            let residual = psi - family.eval_real(psi)? - z;
            let slope = (1.0 - family.derivative(num_complex::Complex64::new(psi, 0.0)).re).abs();
            let stderr = slope * se_psi;
            Ok(PsiCheck { z, psi_hat: psi, residual, stderr, pass: residual.abs() <= 3.0 * stderr })
        })
        .collect()
}
