//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p freesub --release --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use freesub::cbf::{pick_property_check, CbfSpec, Family};
use freesub::classical::ClassicalLaw;
use freesub::duality::{
    corollary_step, gamma_closed_form, log_spaced, theorem_rhs, verify_corollary, verify_theorem, GridSpec,
};
use freesub::free::{FreeLaw, DEFAULT_LADDER};
use freesub::kendall::{kendall_suite, renewal_density_formula, KendallConfig, DEFAULT_SEED};
use freesub::quad::{tanh_sinh, Integrator};
use freesub::special::{lambert_w_minus1, ln_gamma, regularized_gamma};

const T_GRID: [f64; 3] = [0.5, 1.0, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn w_grid() -> Vec<f64> {
    log_spaced(0.1, 10.0, 10).unwrap()
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn identity_closed_form() -> Outcome {
    let grid = GridSpec::new(T_GRID.to_vec(), w_grid()).unwrap();
    let start = Instant::now();
    let report = single_thread(|| {
        verify_theorem(&grid, &[Family::Gamma, Family::PoissonExp, Family::InverseGaussian])
    });
    let elapsed = start.elapsed();
    let all_testable = report.rows.iter().all(|r| r.testable);
    let pass = report.pass && all_testable && report.rows.len() == 90 && elapsed <= Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{} cells, max |lhs - rhs| = {:.2e} (tol 1e-6), {:.1} s single-threaded (limit 60 s)",
            report.rows.len(),
            report.max_residual,
            elapsed.as_secs_f64()
        ),
    )
}

fn identity_stable() -> Outcome {
    let family = Family::free_stable(0.5).unwrap();
    let grid = GridSpec::new(T_GRID.to_vec(), w_grid()).unwrap();
    let report = verify_theorem(&grid, std::slice::from_ref(&family));
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for &t in &T_GRID {
        let law = ClassicalLaw::new(family.clone(), t).unwrap();
        let cutoff = law.series_cutoff().unwrap();
        for &w in &w_grid() {
            if w < cutoff {
                continue;
            }
            let oracle = libm::erfc(t / (2.0 * w.sqrt()));
            worst = worst.max((law.cdf(w).unwrap() - oracle).abs());
            checked += 1;
        }
    }
    let pass = report.pass && report.testable_fraction >= 0.8 && report.max_residual <= 1e-4 && worst <= 1e-8;
    outcome(
        pass,
        format!(
            "testable {:.0}% of 30 cells, max residual {:.2e} (tol 1e-4); series CDF vs erfc at {checked} points max {:.2e} (tol 1e-8)",
            100.0 * report.testable_fraction,
            report.max_residual,
            worst
        ),
    )
}

fn gamma_closed_form_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for &t in &T_GRID {
        for &w in &w_grid() {
            let (rhs, _) = theorem_rhs(&Family::Gamma, t, w).unwrap();
            worst = worst.max((gamma_closed_form(t, w).unwrap() - rhs).abs());
        }
    }
    let s1 = (gamma_closed_form(1.0, 1.0).unwrap() - (-1.0f64).exp()).abs();
    let s2 = (gamma_closed_form(1.0, 2.0).unwrap() - 2.0 * (-2.0f64).exp()).abs();
    let r1 = (theorem_rhs(&Family::Gamma, 1.0, 1.0).unwrap().0 - (-1.0f64).exp()).abs();
    let r2 = (theorem_rhs(&Family::Gamma, 1.0, 2.0).unwrap().0 - 2.0 * (-2.0f64).exp()).abs();
    let spot = s1.max(s2).max(r1).max(r2);
    outcome(
        worst <= 1e-8 && spot <= 1e-8,
        format!("closed form vs rhs max {worst:.2e} on 30 cells (tol 1e-8); spot values max {spot:.2e}"),
    )
}

fn marchenko_pastur(t: f64, x: f64) -> f64 {
    let d = x - 1.0 - t;
    (4.0 * t - d * d).max(0.0).sqrt() / (2.0 * PI * x)
}

fn inverse_gaussian_free(t: f64, x: f64) -> f64 {
    let r = 2.0 * x - 1.0 - t * t;
    if r <= 0.0 {
        0.0
    } else {
        t * r.sqrt() / (PI * (x * x - t * t))
    }
}

fn stieltjes_fidelity() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    let mut worst_atom: f64 = 0.0;
    let mut errors = Vec::new();
    for &t in &T_GRID {
        let s = t.sqrt();
        let (a, b) = ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s));
        let ig_lo = 0.5 * (1.0 + t * t);
        let cases: [(Family, Box<dyn Fn(f64) -> f64>, Vec<f64>, f64); 2] = [
            (
                Family::PoissonExp,
                Box::new(move |x| marchenko_pastur(t, x)),
                (0..50).map(|i| a + (b - a) * (0.02 + 0.96 * i as f64 / 49.0)).collect(),
                0.0,
            ),
            (
                Family::InverseGaussian,
                Box::new(move |x| inverse_gaussian_free(t, x)),
                (0..50).map(|i| ig_lo + 0.02 + 10.0 * i as f64 / 49.0).collect(),
                t,
            ),
        ];
        for (family, oracle, xs, atom_at) in cases {
            let law = FreeLaw::new(family.clone(), t).unwrap();
            for x in xs {
                match law.stieltjes_density(x, &DEFAULT_LADDER) {
                    Ok(d) => {
                        let o = oracle(x);
                        worst_rel = worst_rel.max((d - o).abs() / o);
                    }
                    Err(e) => errors.push(format!("{family} t={t} x={x}: {e}")),
                }
            }
            match law.atom_mass(atom_at, &DEFAULT_LADDER) {
                Ok(m) => worst_atom = worst_atom.max((m - (1.0 - t).max(0.0)).abs()),
                Err(e) => errors.push(format!("{family} t={t} atom: {e}")),
            }
        }
    }
    for e in &errors {
        eprintln!("    {e}");
    }
    outcome(
        errors.is_empty() && worst_rel <= 1e-3 && worst_atom <= 1e-4,
        format!(
            "300 interior points max relative error {worst_rel:.2e} (tol 1e-3); atom masses max error {worst_atom:.2e} (tol 1e-4); {} failures",
            errors.len()
        ),
    )
}

fn transform_machinery() -> Outcome {
    let custom = Family::Custom(CbfSpec::new(0.75, 0.0, vec![(0.5, 0.125), (2.0, 1.0)]).unwrap());
    let families = [
        Family::Gamma,
        Family::PoissonExp,
        Family::InverseGaussian,
        Family::free_stable(0.5).unwrap(),
        Family::free_stable(0.3).unwrap(),
        custom,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for family in &families {
        for i in 0..200 {
            let t = T_GRID[i % 3];
            let law = FreeLaw::new(family.clone(), t).unwrap();
            let z = Complex64::new(rng.random_range(-10.0..10.0), 10f64.powf(rng.random_range(-3.0..2.0)));
            match law.f_transform(z).and_then(|f| law.inverse_map(f)) {
                Ok(back) => worst = worst.max((back - z).norm() / z.norm().max(1.0)),
                Err(e) => {
                    failures += 1;
                    eprintln!("    {family} t={t} z={z}: {e}");
                }
            }
        }
    }
    let mut lambert: f64 = 0.0;
    for &t in &T_GRID {
        let law = FreeLaw::new(Family::Gamma, t).unwrap();
        for i in 0..=99 {
            let z = -10.0 + 9.9 * i as f64 / 99.0;
            let newton = law.f_transform(Complex64::new(z, 0.0)).unwrap().re;
            let w = lambert_w_minus1(-((z - 1.0) / t).exp() / t).unwrap();
            lambert = lambert.max((newton - (1.0 + t * w)).abs());
        }
    }
    outcome(
        failures == 0 && worst <= 1e-10 && lambert <= 1e-10,
        format!(
            "F^-1(F(z)) = z on {} points, max scaled error {worst:.2e} (tol 1e-10), {failures} failures; Newton vs W_-1 on [-10, -0.1] max {lambert:.2e} (tol 1e-10)",
            200 * families.len()
        ),
    )
}

fn kendall_renewal() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for family in [Family::Gamma, Family::PoissonExp] {
        let report = kendall_suite(&family, &KendallConfig::standard(100_000, DEFAULT_SEED)).unwrap();
        for c in &report.cells {
            lines.push(format!(
                "{family} cell s[{}, {}] y[{}, {}]: lhs {:.5} rhs {:.5} se {:.1e} grid shift {:.1e} {}",
                c.s_lo, c.s_hi, c.y_lo, c.y_hi, c.lhs, c.rhs, c.stderr, c.grid_shift, if c.pass { "ok" } else { "FAIL" }
            ));
        }
        for u in &report.u {
            lines.push(format!(
                "{family} u({}): mc {:.5} formula {:.5} se {:.1e} grid shift {:.1e} {}",
                u.s, u.u_hat, u.u_formula, u.stderr, u.grid_shift, if u.pass { "ok" } else { "FAIL" }
            ));
        }
        pass &= report.cells.len() == 4 && report.pass();
    }
    let mut deterministic: f64 = 0.0;
    for family in [Family::Gamma, Family::PoissonExp, Family::InverseGaussian] {
        let law = FreeLaw::new(family.clone(), 1.0).unwrap();
        for &s in &T_GRID {
            let a = renewal_density_formula(&family, s).unwrap();
            deterministic = deterministic.max((a - law.laplace(s).unwrap().value).abs());
        }
    }
    let elapsed = start.elapsed();
    for l in &lines {
        println!("    {l}");
    }
    outcome(
        pass && deterministic <= 1e-6 && elapsed <= Duration::from_secs(120),
        format!(
            "1e5 paths, 8 cells and 6 renewal points within 3 SE with grid shift < SE/3: {}; formula vs free Laplace max {deterministic:.2e} (tol 1e-6); {:.1} s (limit 120 s)",
            if pass { "yes" } else { "no" },
            elapsed.as_secs_f64()
        ),
    )
}

fn corollary() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for family in [Family::Gamma, Family::PoissonExp, Family::InverseGaussian, Family::free_stable(0.5).unwrap()] {
        for &t in &T_GRID {
            for &w in &T_GRID {
                match verify_corollary(&family, t, w, corollary_step(w), 1e-5) {
                    Ok(r) => worst = worst.max(r.residual),
                    Err(e) => {
                        failures += 1;
                        eprintln!("    {family} t={t} w={w}: {e}");
                    }
                }
            }
        }
    }
    outcome(
        failures == 0 && worst <= 1e-5,
        format!("36 cells, max residual {worst:.2e} (tol 1e-5), {failures} failures"),
    )
}

fn properties() -> Outcome {
    let families = [
        Family::Gamma,
        Family::PoissonExp,
        Family::InverseGaussian,
        Family::free_stable(0.5).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 8);
    let points: Vec<Complex64> = (0..500)
        .map(|_| Complex64::new(rng.random_range(-50.0..50.0), 10f64.powf(rng.random_range(-6.0..3.0))))
        .collect();
    let mut failed = Vec::new();
    for f in &families {
        if !pick_property_check(f, &points).unwrap().pass {
            failed.push(format!("pick {f}"));
        }
        for z in [0.5, 1.0, 2.0] {
            let levy = |x: f64| Ok(-(-z * x).exp_m1() * f.levy_density(x)?);
            let head = tanh_sinh(levy, 0.0, 1.0, 1e-13).unwrap().value;
            let tail = Integrator::new(1e-13, 1e-12).try_integrate_to_infinity(levy, 1.0).unwrap().value;
            let exact = f.eval_real(z).unwrap() - f.killing();
            if (head + tail - exact).abs() > 1e-8 {
                failed.push(format!("levy {f} z={z}"));
            }
        }
        for &t in &T_GRID {
            let mass = FreeLaw::new(f.clone(), t).unwrap().measure().unwrap().total_mass().unwrap();
            if (mass - 1.0).abs() > 1e-4 {
                failed.push(format!("free mass {f} t={t}: {mass}"));
            }
            let law = ClassicalLaw::new(f.clone(), t).unwrap();
            let (y1, y2) = (0.5 * t + 0.3, 2.0 * t + 1.0);
            let integral = Integrator::new(1e-12, 1e-12)
                .try_integrate(|y| law.pdf(y), y1, y2)
                .unwrap()
                .value;
            let diff = law.cdf(y2).unwrap() - law.cdf(y1).unwrap();
            if (integral - diff).abs() > 1e-8 {
                failed.push(format!("cdf/pdf {f} t={t}"));
            }
        }
    }
    for i in 1..200 {
        let x = -(-1.0f64).exp() * i as f64 / 200.0;
        let w = lambert_w_minus1(x).unwrap();
        if w > -1.0 || (w * w.exp() - x).abs() > 1e-13 * x.abs().max(1e-300) * 10.0 {
            failed.push(format!("W_-1({x})"));
        }
    }
    for a in [0.1, 0.5, 1.0, 2.5, 10.0, 40.0] {
        for x in [0.01, 0.5, 1.0, 3.0, 12.0, 60.0] {
            let (p, q) = regularized_gamma(a, x).unwrap();
            let (p1, _) = regularized_gamma(a + 1.0, x).unwrap();
            let step = (a * x.ln() - x - ln_gamma(a + 1.0).unwrap()).exp();
            if (p + q - 1.0).abs() > 1e-14 || (p1 - (p - step)).abs() > 1e-13 {
                failed.push(format!("incomplete gamma a={a} x={x}"));
            }
        }
    }
    for f in &failed {
        eprintln!("    {f}");
    }
    outcome(
        failed.is_empty(),
        format!(
            "Pick, Levy-measure quadrature, free normalization, CDF/PDF, W_-1 and incomplete gamma identities: {} failures (proptest suites in tests/properties.rs)",
            failed.len()
        ),
    )
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("identity on gamma, poisson-exp, inverse-gaussian", identity_closed_form),
        ("identity on free-stable(1/2)", identity_stable),
        ("gamma closed form", gamma_closed_form_check),
        ("Stieltjes inversion fidelity", stieltjes_fidelity),
        ("transform machinery", transform_machinery),
        ("Kendall and renewal Monte Carlo", kendall_renewal),
        ("derivative identity", corollary),
        ("property suites", properties),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("criterion {} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
