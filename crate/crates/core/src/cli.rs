//! Command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 usage
//! error, 3 failure of the numerical machinery.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cbf::{CbfSpec, Family};
use crate::classical::{ClassicalLaw, ClassicalRow};
use crate::duality::{corollary_step, log_spaced, verify_corollary, verify_theorem, CorollaryRow, GridSpec, TheoremRow};
use crate::error::Error;
use crate::free::{Atom, FreeLaw};
use crate::kendall::{kendall_suite, KendallConfig, KendallReport, DEFAULT_SEED};
use crate::report::{fmt17, sig17, write_csv, write_json, Tabular};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    FreeStable,
    Gamma,
    PoissonExp,
    InverseGaussian,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `lo:hi:n`, a grid of n points on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let n = parts[2].trim().parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) || n == 0 || (n == 1 && hi != lo) {
            return Err(format!("invalid range {s:?}"));
        }
        Ok(Self { lo, hi, n })
    }
}

impl fmt::Display for GridRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl GridRange {
    fn linear(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Stability index in (0, 1) for free-stable.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// JSON file {"a":…, "b":…, "atoms":[[x, m], …]} for custom.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct OutputArgs {
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct TheoremArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Comma-separated t values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub t: Vec<f64>,
    /// Log-spaced w grid lo:hi:n.
    #[arg(long, default_value = "0.1:10:10")]
    pub w_log: GridRange,
    /// Residual tolerance for closed-form families.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Residual tolerance for free-stable.
    #[arg(long, default_value_t = 1e-4)]
    pub stable_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct CorollaryArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub t: Vec<f64>,
    /// Comma-separated w values.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub w: Vec<f64>,
    /// Difference step; max(1e-4, 1e-3 w) when absent.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct KendallArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub n_paths: usize,
    /// Grid step for families without exact path simulation.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct TabulateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Linear grid lo:hi:n of evaluation points.
    #[arg(long)]
    pub grid: Option<GridRange>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Both sides of the Laplace identity on a (t, w) grid.
    VerifyTheorem(TheoremArgs),
    /// The derivative form of the identity.
    VerifyCorollary(CorollaryArgs),
    /// Kendall cells and renewal density by Monte Carlo.
    VerifyKendall(KendallArgs),
    /// Atoms and density of the free law.
    TabulateFree(TabulateArgs),
    /// CDF and density of the classical law.
    TabulateClassical(TabulateArgs),
    /// List the available families.
    Families(OutputArgs),
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize)]
#[command(name = "freesub", version, about = "Free and classical subordinator semigroups")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

fn push_family(out: &mut Vec<String>, f: &FamilyArgs) {
    out.push("--family".into());
    out.push(f.family.to_possible_value().expect("named").get_name().into());
    if let Some(a) = f.alpha {
        out.push("--alpha".into());
        out.push(a.to_string());
    }
    if let Some(p) = &f.spec {
        out.push("--spec".into());
        out.push(p.display().to_string());
    }
}

fn push_output(out: &mut Vec<String>, o: &OutputArgs) {
    if let Some(p) = &o.output {
        out.push("--output".into());
        out.push(p.display().to_string());
    }
    out.push("--format".into());
    out.push(o.format.to_possible_value().expect("named").get_name().into());
    if let Some(n) = o.threads {
        out.push("--threads".into());
        out.push(n.to_string());
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl CliConfig {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::VerifyTheorem(_) => "verify-theorem",
            Command::VerifyCorollary(_) => "verify-corollary",
            Command::VerifyKendall(_) => "verify-kendall",
            Command::TabulateFree(_) => "tabulate-free",
            Command::TabulateClassical(_) => "tabulate-classical",
            Command::Families(_) => "families",
        }
    }

    /// Canonical argument list with every option spelled out.
    pub fn to_args(&self) -> Vec<String> {
        let mut out = vec![self.name().to_string()];
        match &self.command {
            Command::VerifyTheorem(a) => {
                push_family(&mut out, &a.family);
                out.extend(["--t".into(), list(&a.t)]);
                out.extend(["--w-log".into(), a.w_log.to_string()]);
                out.extend(["--tol".into(), a.tol.to_string()]);
                out.extend(["--stable-tol".into(), a.stable_tol.to_string()]);
                push_output(&mut out, &a.output);
            }
            Command::VerifyCorollary(a) => {
                push_family(&mut out, &a.family);
                out.extend(["--t".into(), list(&a.t)]);
                out.extend(["--w".into(), list(&a.w)]);
                if let Some(h) = a.h {
                    out.extend(["--h".into(), h.to_string()]);
                }
                out.extend(["--tol".into(), a.tol.to_string()]);
                push_output(&mut out, &a.output);
            }
            Command::VerifyKendall(a) => {
                push_family(&mut out, &a.family);
                out.extend(["--seed".into(), a.seed.to_string()]);
                out.extend(["--n-paths".into(), a.n_paths.to_string()]);
                out.extend(["--step".into(), a.step.to_string()]);
                push_output(&mut out, &a.output);
            }
            Command::TabulateFree(a) | Command::TabulateClassical(a) => {
                push_family(&mut out, &a.family);
                out.extend(["--t".into(), a.t.to_string()]);
                if let Some(g) = a.grid {
                    out.extend(["--grid".into(), g.to_string()]);
                }
                push_output(&mut out, &a.output);
            }
            Command::Families(o) => push_output(&mut out, o),
        }
        out
    }

    fn output(&self) -> &OutputArgs {
        match &self.command {
            Command::VerifyTheorem(a) => &a.output,
            Command::VerifyCorollary(a) => &a.output,
            Command::VerifyKendall(a) => &a.output,
            Command::TabulateFree(a) | Command::TabulateClassical(a) => &a.output,
            Command::Families(o) => o,
        }
    }

    /// Range checks that run before any computation.
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("--{name} must be positive and finite, got {v}"))
            }
        };
        if self.output().threads == Some(0) {
            return Err("--threads must be at least 1".into());
        }
        match &self.command {
            Command::VerifyTheorem(a) => {
                a.t.iter().try_for_each(|&t| positive("t", t))?;
                positive("w-log lower end", a.w_log.lo)?;
                positive("tol", a.tol)?;
                positive("stable-tol", a.stable_tol)?;
            }
            Command::VerifyCorollary(a) => {
                a.t.iter().try_for_each(|&t| positive("t", t))?;
                a.w.iter().try_for_each(|&w| positive("w", w))?;
                if let Some(h) = a.h {
                    positive("h", h)?;
                    if a.w.iter().any(|&w| h > w / 10.0) {
                        return Err(format!("--h {h} must not exceed w/10"));
                    }
                }
                positive("tol", a.tol)?;
            }
            Command::VerifyKendall(a) => {
                if a.n_paths < 10_000 {
                    return Err(format!("--n-paths must be at least 10000, got {}", a.n_paths));
                }
                positive("step", a.step)?;
            }
            Command::TabulateFree(a) | Command::TabulateClassical(a) => {
                positive("t", a.t)?;
                if let Some(g) = a.grid {
                    if matches!(self.command, Command::TabulateClassical(_)) && g.lo < 0.0 {
                        return Err("--grid must lie in [0, inf) for the classical law".into());
                    }
                }
            }
            Command::Families(_) => {}
        }
        Ok(())
    }
}

/// Failure of a run, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::InvalidSpec(_) | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("cannot write output: {e}"))
    }
}

fn resolve_family(f: &FamilyArgs) -> Result<Family, Failure> {
    if f.family != FamilyKind::FreeStable && f.alpha.is_some() {
        return Err(Failure::Usage("--alpha only applies to free-stable".into()));
    }
    if f.family != FamilyKind::Custom && f.spec.is_some() {
        return Err(Failure::Usage("--spec only applies to custom".into()));
    }
    Ok(match f.family {
        FamilyKind::FreeStable => {
            let alpha = f
                .alpha
                .ok_or_else(|| Failure::Usage("free-stable needs --alpha".into()))?;
            Family::free_stable(alpha)?
        }
        FamilyKind::Gamma => Family::Gamma,
        FamilyKind::PoissonExp => Family::PoissonExp,
        FamilyKind::InverseGaussian => Family::InverseGaussian,
        FamilyKind::Custom => {
            let path = f
                .spec
                .as_ref()
                .ok_or_else(|| Failure::Usage("custom needs --spec path.json".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            Family::Custom(CbfSpec::from_json(&text)?)
        }
    })
}

fn needs_builtin(family: &Family, command: &str) -> Result<(), Failure> {
    if family.is_builtin() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{command} needs the classical law, which custom families lack")))
    }
}

#[derive(Serialize)]
struct Header<'a> {
    command: &'a str,
    version: &'static str,
    family: Option<String>,
    seed: u64,
    config: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a, H: Serialize, T: Serialize> {
    header: &'a H,
    report: &'a T,
}

/// Writes the report and, for CSV files, a `.header.json` sidecar.
struct Sink<'a> {
    config: &'a CliConfig,
    family: Option<String>,
    seed: u64,
}

impl Sink<'_> {
    fn header(&self) -> Header<'_> {
        Header {
            command: self.config.name(),
            version: env!("CARGO_PKG_VERSION"),
            family: self.family.clone(),
            seed: self.seed,
            config: self.config.to_args(),
        }
    }

    fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
        Ok(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit<R: Tabular, E: Serialize, X: Serialize>(&self, rows: &[R], json: &E, extra: &X) -> io::Result<()> {
        let out = self.config.output();
        let path = out.output.as_deref();
        let header = self.header();
        match out.format {
            Format::Json => {
                #[derive(Serialize)]
                struct H<'a, X> {
                    #[serde(flatten)]
                    base: &'a Header<'a>,
                    #[serde(flatten)]
                    extra: &'a X,
                }
                let h = H { base: &header, extra };
                let mut w = Self::open(path)?;
                write_json(&Envelope { header: &h, report: json }, &mut w)?;
                w.flush()
            }
            Format::Csv => {
                let mut w = Self::open(path)?;
                write_csv(rows, &mut w)?;
                w.flush()?;
                if let Some(p) = path {
                    #[derive(Serialize)]
                    struct H<'a, X> {
                        #[serde(flatten)]
                        base: &'a Header<'a>,
                        #[serde(flatten)]
                        extra: &'a X,
                    }
                    let mut side = p.as_os_str().to_owned();
                    side.push(".header.json");
                    let mut f = BufWriter::new(File::create(PathBuf::from(side))?);
                    write_json(&H { base: &header, extra }, &mut f)?;
                    f.flush()?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct NoExtra {}

fn cmd_theorem(config: &CliConfig, a: &TheoremArgs) -> Result<i32, Failure> {
    let family = resolve_family(&a.family)?;
    needs_builtin(&family, "verify-theorem")?;
    let w = log_spaced(a.w_log.lo, a.w_log.hi, a.w_log.n)?;
    let grid = GridSpec::new(a.t.clone(), w)?.with_tolerances(a.tol, a.stable_tol)?;
    let report = verify_theorem(&grid, std::slice::from_ref(&family));
    let sink = Sink { config, family: Some(family.to_string()), seed: DEFAULT_SEED };
    #[derive(Serialize)]
    struct Summary {
        #[serde(serialize_with = "sig17")]
        max_residual: f64,
        #[serde(serialize_with = "sig17")]
        testable_fraction: f64,
        pass: bool,
    }
    let summary = Summary {
        max_residual: report.max_residual,
        testable_fraction: report.testable_fraction,
        pass: report.pass,
    };
    sink.emit::<TheoremRow, _, _>(&report.rows, &report, &summary)?;
    eprintln!(
        "{family}: {} cells, testable {:.0}%, max residual {:.3e}, {}",
        report.rows.len(),
        100.0 * report.testable_fraction,
        report.max_residual,
        if report.pass { "PASS" } else { "FAIL" }
    );
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("  t={} w={}: {}", r.t, r.w, r.error.as_deref().unwrap_or_default());
    }
    Ok(if report.pass {
        EXIT_PASS
    } else if report.numerical_failure() {
        EXIT_NUMERICAL
    } else {
        EXIT_FAIL
    })
}

fn cmd_corollary(config: &CliConfig, a: &CorollaryArgs) -> Result<i32, Failure> {
    let family = resolve_family(&a.family)?;
    needs_builtin(&family, "verify-corollary")?;
    let cells: Vec<(f64, f64)> = a.t.iter().flat_map(|&t| a.w.iter().map(move |&w| (t, w))).collect();
    let mut rows = {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(t, w)| verify_corollary(&family, t, w, a.h.unwrap_or_else(|| corollary_step(w)), a.tol))
            .collect::<Result<Vec<CorollaryRow>, Error>>()?
    };
    rows.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.w.total_cmp(&y.w)));
    let pass = rows.iter().all(|r| r.pass);
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Summary {
        #[serde(serialize_with = "sig17")]
        max_residual: f64,
        pass: bool,
    }
    let sink = Sink { config, family: Some(family.to_string()), seed: DEFAULT_SEED };
    #[derive(Serialize)]
    struct Report<'a> {
        rows: &'a [CorollaryRow],
        #[serde(serialize_with = "sig17")]
        max_residual: f64,
        pass: bool,
    }
    sink.emit(&rows, &Report { rows: &rows, max_residual, pass }, &Summary { max_residual, pass })?;
    eprintln!("{family}: {} cells, max residual {max_residual:.3e}, {}", rows.len(), if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

/// One CSV line of a Kendall report.
struct KendallLine {
    kind: &'static str,
    s_lo: f64,
    s_hi: f64,
    y_lo: f64,
    y_hi: f64,
    estimate: f64,
    reference: f64,
    stderr: f64,
    grid_shift: f64,
    pass: bool,
}

impl Tabular for KendallLine {
    fn header() -> Vec<&'static str> {
        vec!["kind", "s_lo", "s_hi", "y_lo", "y_hi", "estimate", "reference", "stderr", "grid_shift", "pass"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.kind.into(),
            fmt17(self.s_lo),
            fmt17(self.s_hi),
            fmt17(self.y_lo),
            fmt17(self.y_hi),
            fmt17(self.estimate),
            fmt17(self.reference),
            fmt17(self.stderr),
            fmt17(self.grid_shift),
            self.pass.to_string(),
        ]
    }
}

fn kendall_lines(r: &KendallReport, half_width: f64) -> Vec<KendallLine> {
    let mut out: Vec<KendallLine> = r
        .cells
        .iter()
        .map(|c| KendallLine {
            kind: "cell",
            s_lo: c.s_lo,
            s_hi: c.s_hi,
            y_lo: c.y_lo,
            y_hi: c.y_hi,
            estimate: c.lhs,
            reference: c.rhs,
            stderr: c.stderr,
            grid_shift: c.grid_shift,
            pass: c.pass,
        })
        .collect();
    out.extend(r.u.iter().map(|u| KendallLine {
        kind: "renewal",
        s_lo: u.s - half_width,
        s_hi: u.s + half_width,
        y_lo: f64::NAN,
        y_hi: f64::NAN,
        estimate: u.u_hat,
        reference: u.u_formula,
        stderr: u.stderr,
        grid_shift: u.grid_shift,
        pass: u.pass,
    }));
    out
}

fn cmd_kendall(config: &CliConfig, a: &KendallArgs) -> Result<i32, Failure> {
    let family = resolve_family(&a.family)?;
    needs_builtin(&family, "verify-kendall")?;
    let cfg = KendallConfig { step: a.step, ..KendallConfig::standard(a.n_paths, a.seed) };
    let report = kendall_suite(&family, &cfg)?;
    let sink = Sink { config, family: Some(family.to_string()), seed: a.seed };
    #[derive(Serialize)]
    struct Summary {
        n_paths: usize,
        pass: bool,
    }
    let pass = report.pass();
    sink.emit(&kendall_lines(&report, cfg.half_width), &report, &Summary { n_paths: a.n_paths, pass })?;
    eprintln!(
        "{family}: {} cells, {} renewal points, {}",
        report.cells.len(),
        report.u.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

struct FreeRow(f64, f64);

impl Tabular for FreeRow {
    fn header() -> Vec<&'static str> {
        vec!["x", "density"]
    }

    fn record(&self) -> Vec<String> {
        vec![fmt17(self.0), fmt17(self.1)]
    }
}

#[derive(Serialize)]
struct FreeRowJson {
    #[serde(serialize_with = "sig17")]
    x: f64,
    #[serde(serialize_with = "sig17")]
    density: f64,
}

fn cmd_tabulate_free(config: &CliConfig, a: &TabulateArgs) -> Result<i32, Failure> {
    let family = resolve_family(&a.family)?;
    let measure = FreeLaw::new(family.clone(), a.t)?.measure()?;
    let (lo, hi) = measure.support();
    let xs = match a.grid {
        Some(g) => g.linear(),
        None => GridRange { lo, hi: hi.min(lo + 10.0), n: 201 }.linear(),
    };
    let table = measure.tabulate(&xs)?;
    #[derive(Serialize)]
    struct Extra<'a> {
        #[serde(serialize_with = "sig17")]
        t: f64,
        atoms: &'a [Atom],
        #[serde(serialize_with = "sig17")]
        support_lo: f64,
        #[serde(serialize_with = "sig17")]
        support_hi: f64,
    }
    let extra = Extra { t: a.t, atoms: measure.atoms(), support_lo: lo, support_hi: hi };
    let rows: Vec<FreeRow> = table.iter().map(|&(x, d)| FreeRow(x, d)).collect();
    let json: Vec<FreeRowJson> = table.iter().map(|&(x, density)| FreeRowJson { x, density }).collect();
    Sink { config, family: Some(family.to_string()), seed: DEFAULT_SEED }.emit(&rows, &json, &extra)?;
    Ok(EXIT_PASS)
}

impl Tabular for ClassicalRow {
    fn header() -> Vec<&'static str> {
        vec!["y", "cdf", "pdf"]
    }

    fn record(&self) -> Vec<String> {
        vec![fmt17(self.y), fmt17(self.cdf), fmt17(self.pdf)]
    }
}

fn cmd_tabulate_classical(config: &CliConfig, a: &TabulateArgs) -> Result<i32, Failure> {
    let family = resolve_family(&a.family)?;
    needs_builtin(&family, "tabulate-classical")?;
    let law = ClassicalLaw::new(family.clone(), a.t)?;
    let ys = a.grid.unwrap_or(GridRange { lo: 0.0, hi: 10.0 * a.t.max(1.0), n: 201 }).linear();
    let rows = law.tabulate(&ys)?;
    #[derive(Serialize)]
    struct Extra {
        #[serde(serialize_with = "sig17")]
        t: f64,
        #[serde(serialize_with = "sig17")]
        total_mass: f64,
    }
    let extra = Extra { t: a.t, total_mass: law.total_mass() };
    Sink { config, family: Some(family.to_string()), seed: DEFAULT_SEED }.emit(&rows, &rows, &extra)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct FamilyLine {
    name: &'static str,
    exponent: &'static str,
    parameters: &'static str,
}

impl Tabular for FamilyLine {
    fn header() -> Vec<&'static str> {
        vec!["name", "exponent", "parameters"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.name.into(), self.exponent.into(), self.parameters.into()]
    }
}

pub const FAMILIES: [(&str, &str, &str); 5] = [
    ("free-stable(alpha)", "z^(1-alpha)", "--alpha in (0,1)"),
    ("gamma", "ln(1+z)", ""),
    ("poisson-exp", "z/(z+1)", ""),
    ("inverse-gaussian", "sqrt(1+2z)", ""),
    ("custom(json)", "a + sum m (z x - 1)/(z + x)", "--spec path.json"),
];

fn cmd_families(config: &CliConfig) -> Result<i32, Failure> {
    let rows: Vec<FamilyLine> = FAMILIES
        .iter()
        .map(|&(name, exponent, parameters)| FamilyLine { name, exponent, parameters })
        .collect();
    Sink { config, family: None, seed: DEFAULT_SEED }.emit(&rows, &rows, &NoExtra {})?;
    Ok(EXIT_PASS)
}

fn execute(config: &CliConfig) -> Result<i32, Failure> {
    match &config.command {
        Command::VerifyTheorem(a) => cmd_theorem(config, a),
        Command::VerifyCorollary(a) => cmd_corollary(config, a),
        Command::VerifyKendall(a) => cmd_kendall(config, a),
        Command::TabulateFree(a) => cmd_tabulate_free(config, a),
        Command::TabulateClassical(a) => cmd_tabulate_classical(config, a),
        Command::Families(_) => cmd_families(config),
    }
}

/// Parse `argv` (program name first), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if let Err(msg) = config.validate() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = match config.output().threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&config)),
            Err(e) => Err(Failure::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => execute(&config),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}
