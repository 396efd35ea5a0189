//! The `degenkernel` command line: `kernel`, `wf`, `mc` and `validate`.
//!
//! Exit codes: 0 success, 1 failed validation or numerical failure,
//! 2 configuration error, 3 region violation.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::Problem;
use crate::config::{load_config, GeneralConfig, ProblemConfig, WfConfig};
use crate::error::{Error, Result};
use crate::kernel::{BudgetVariant, KernelModel, KernelValue, Localization};
use crate::modelkernel::{check_ck, eval_q, ln_q};
use crate::sde::{self, Barriers, McConfig, McEnsemble, Scheme};
use crate::special::ck_constant;
use crate::transform::{compute_nu, TransformBundle};
use crate::wrightfisher::{wf_auto, wf_symmetry_residual, Side, WfKernel, WfProblem, WfValue};

/// First line of every CSV file.
pub const CSV_VERSION: &str = "# degenkernel-csv v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REGION: i32 = 3;

/// Default time steps per horizon for Monte Carlo.
pub const DEFAULT_STEPS: f64 = 500.0;

#[derive(Debug, Parser)]
#[command(name = "degenkernel", version, about = "Certified heat kernels for degenerate diffusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate p^{k-approx} on a grid with its certificate.
    Kernel(RunArgs),
    /// Evaluate the two-sided Wright–Fisher kernel on a grid.
    Wf(RunArgs),
    /// Monte Carlo histogram of surviving paths.
    Mc(RunArgs),
    /// Run the validation suite and write a JSON report.
    Validate(RunArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Problem file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Grid "x=a:b:n,y=a:b:n,t=a:b:n".
    #[arg(long)]
    pub grid: Option<String>,
    /// Expansion order.
    #[arg(long, default_value_t = crate::kernel::DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo path count.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    /// Monte Carlo step; defaults to t/500.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fall back to Monte Carlo outside the certified region.
    #[arg(long)]
    pub allow_uncertified: bool,
    /// Budget: scale, escape, confined or local.
    #[arg(long, default_value = "scale")]
    pub variant: String,
    /// Monte Carlo scheme: euler_full_truncation or transformed_z.
    #[arg(long, default_value = "euler_full_truncation")]
    pub scheme: String,
}

/// One axis of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64 })
            .collect()
    }

    pub fn spacing(&self) -> Option<f64> {
        (self.n > 1).then(|| (self.hi - self.lo) / (self.n - 1) as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Grid {
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    pub t: Option<Axis>,
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Grid> {
        let mut g = Grid::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, range) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid: expected name=a:b:n, got {part:?}")))?;
            let name = name.trim();
            let fields: Vec<&str> = range.split(':').map(str::trim).collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Config(format!("grid.{name}: {s:?} is not a number")))
            };
            let axis = match fields.as_slice() {
                [v] => Axis { lo: num(v)?, hi: num(v)?, n: 1 },
                [a, b, n] => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| Error::Config(format!("grid.{name}: count {n:?} is not a non-negative integer")))?;
                    Axis { lo: num(a)?, hi: num(b)?, n }
                }
                _ => return Err(Error::Config(format!("grid.{name}: expected a:b:n, got {range:?}"))),
            };
            if axis.n == 0 {
                return Err(Error::Config(format!("grid.{name}: empty range (count 0)")));
            }
            if axis.hi < axis.lo || (axis.n > 1 && axis.hi == axis.lo) {
                return Err(Error::Config(format!("grid.{name}: empty range {}:{}", axis.lo, axis.hi)));
            }
            let slot = match name {
                "x" => &mut g.x,
                "y" => &mut g.y,
                "t" => &mut g.t,
                other => return Err(Error::Config(format!("grid: unknown axis {other:?}"))),
            };
            if slot.is_some() {
                return Err(Error::Config(format!("grid.{name}: given twice")));
            }
            *slot = Some(axis);
        }
        Ok(g)
    }

    fn axis(&self, name: &str) -> Result<Axis> {
        let a = match name {
            "x" => self.x,
            "y" => self.y,
            _ => self.t,
        };
        a.ok_or_else(|| Error::Config(format!("grid.{name}: missing")))
    }
}

/// Shortest round-trip-safe rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_header(command: &str, columns: &[&str]) -> String {
    format!("{CSV_VERSION} command={command}\n{}\n", columns.join(","))
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Precondition(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Region(_) => EXIT_REGION,
        Error::Numerical(_) | Error::Simulation(_) => EXIT_VALIDATION,
    }
}

/// Parses `argv` and runs the command; returns the exit code.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Wf(a) => cmd_wf(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("out: cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mc_config(args: &RunArgs, t: f64) -> Result<McConfig> {
    let dt = args.dt.unwrap_or(t / DEFAULT_STEPS);
    let cfg = McConfig::new(args.paths, dt, args.seed).with_scheme(Scheme::parse(&args.scheme)?);
    cfg.check(t)?;
    Ok(cfg)
}

fn general(args: &RunArgs) -> Result<GeneralConfig> {
    match load_config(&args.config)? {
        ProblemConfig::General(g) => Ok(g),
        ProblemConfig::WrightFisher(_) => Err(Error::Config("beta: set, use the wf command".into())),
    }
}

fn wright_fisher(args: &RunArgs) -> Result<WfConfig> {
    match load_config(&args.config)? {
        ProblemConfig::WrightFisher(w) => Ok(w),
        ProblemConfig::General(_) => Err(Error::Config("beta: missing, required by the wf command".into())),
    }
}

fn build_model(g: &GeneralConfig) -> Result<KernelModel> {
    let mut bundle = TransformBundle::new(g.problem.clone())?;
    if let Some(nu) = g.nu_override {
        bundle = bundle.with_nu_override(nu);
    }
    KernelModel::new(bundle)
}

/// Monte Carlo density at `y` from a bin of width `h` around it.
fn mc_point(ens: &McEnsemble, y: f64, h: f64) -> Result<(f64, f64)> {
    let lo = (y - 0.5 * h).max(0.0);
    let hist = sde::empirical_density(ens, &[lo, lo + h])?;
    Ok((hist.density[0], hist.std_err[0]))
}

fn mc_rel(density: f64, se: f64) -> f64 {
    if density > 0.0 { se / density } else { f64::INFINITY }
}

fn bin_width(y_axis: &Axis, y: f64) -> f64 {
    y_axis.spacing().unwrap_or(0.1 * y.abs().max(1e-6))
}

/// Row of a kernel table.
struct Row {
    x: f64,
    y: f64,
    t: f64,
    value: f64,
    rel: f64,
    k: usize,
    variant: &'static str,
    side: Option<&'static str>,
}

fn render(command: &str, rows: &[Row], with_side: bool) -> String {
    let mut cols = vec!["x", "y", "t", "p_k_approx", "certificate_rel", "k", "variant"];
    if with_side {
        cols.push("side");
    }
    let mut s = csv_header(command, &cols);
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.t),
            fmt_f64(r.value),
            fmt_f64(r.rel),
            r.k,
            r.variant
        );
        if with_side {
            let _ = write!(s, ",{}", r.side.unwrap_or("none"));
        }
        s.push('\n');
    }
    s
}

fn grid_points(grid: &Grid) -> Result<(Axis, Vec<(f64, f64, f64)>)> {
    let (xa, ya, ta) = (grid.axis("x")?, grid.axis("y")?, grid.axis("t")?);
    let (xs, ys, ts) = (xa.values(), ya.values(), ta.values());
    let mut pts = Vec::with_capacity(xs.len() * ys.len() * ts.len());
    for &x in &xs {
        for &y in &ys {
            for &t in &ts {
                pts.push((x, y, t));
            }
        }
    }
    Ok((ya, pts))
}

/// Fills rows that failed with a region error with Monte Carlo estimates,
/// one simulation per `(x, t)`.
fn fill_mc<F>(rows: &mut [Option<Row>], pts: &[(f64, f64, f64)], y_axis: &Axis, args: &RunArgs, with_side: bool, simulate: F) -> Result<()>
where
    F: Fn(f64, f64, &McConfig) -> Result<McEnsemble>,
{
    let mut cache: Vec<((f64, f64), McEnsemble)> = Vec::new();
    for (i, &(x, y, t)) in pts.iter().enumerate() {
        if rows[i].is_some() {
            continue;
        }
        let ens = match cache.iter().position(|(key, _)| *key == (x, t)) {
            Some(p) => &cache[p].1,
            None => {
                let e = simulate(x, t, &mc_config(args, t)?)?;
                cache.push(((x, t), e));
                &cache.last().expect("just pushed").1
            }
        };
        let (d, se) = mc_point(ens, y, bin_width(y_axis, y))?;
        rows[i] = Some(Row {
            x,
            y,
            t,
            value: d,
            rel: mc_rel(d, se),
            k: args.k,
            variant: BudgetVariant::Mc.name(),
            side: with_side.then_some("none"),
        });
    }
    Ok(())
}

fn collect_rows<T, F>(pts: &[(f64, f64, f64)], allow: bool, eval: F) -> Result<Vec<Option<T>>>
where
    T: Send,
    F: Fn(f64, f64, f64) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> =
        crate::parallel::install(None, || pts.par_iter().map(|&(x, y, t)| eval(x, y, t)).collect());
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => out.push(Some(v)),
            Err(Error::Region(msg)) if allow => {
                let _ = msg;
                out.push(None)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn kernel_value(model: &KernelModel, loc: Option<&Localization>, variant: BudgetVariant, k: usize, x: f64, y: f64, t: f64) -> Result<KernelValue> {
    match (variant, loc) {
        (BudgetVariant::Local, _) => model.p_k_approx(k, x, y, t),
        (_, Some(loc)) => model.p_k_global(loc, k, x, y, t, variant),
        (_, None) => Err(Error::Region(format!(
            "({x}, {y}, {t}) has no certifying localization level G"
        ))),
    }
}

pub fn cmd_kernel(args: &RunArgs) -> Result<i32> {
    let g = general(args)?;
    let variant = BudgetVariant::parse(&args.variant)?;
    if variant == BudgetVariant::Mc {
        return Err(Error::Config("variant: 'mc' is selected by --allow-uncertified".into()));
    }
    let grid = Grid::parse(args.grid.as_deref().unwrap_or(""))?;
    let (y_axis, pts) = grid_points(&grid)?;
    if args.k == 0 {
        return Err(Error::Config("k: must be at least 1".into()));
    }
    let model = build_model(&g)?;
    let loc = if variant == BudgetVariant::Local {
        None
    } else {
        let res = match g.localization {
            Some(gl) => model.localization(gl),
            None => {
                let x_max = pts.iter().map(|p| p.0.max(p.1)).fold(0.0, f64::max);
                let t_max = pts.iter().map(|p| p.2).fold(0.0, f64::max);
                model.default_g(x_max, t_max, args.k, variant)
            }
        };
        match res {
            Ok(l) => Some(l),
            Err(Error::Region(_)) if args.allow_uncertified => None,
            Err(e) => return Err(e),
        }
    };
    let values = collect_rows(&pts, args.allow_uncertified, |x, y, t| {
        kernel_value(&model, loc.as_ref(), variant, args.k, x, y, t)
    })?;
    let mut rows: Vec<Option<Row>> = values
        .into_iter()
        .map(|v| {
            v.map(|v| Row {
                x: v.x,
                y: v.y,
                t: v.t,
                value: v.value,
                rel: v.relative_certificate,
                k: v.order_k,
                variant: v.provenance.name(),
                side: None,
            })
        })
        .collect();
    let problem = g.problem.clone();
    fill_mc(&mut rows, &pts, &y_axis, args, false, |x, t, cfg| sde::simulate_x(&problem, x, t, cfg))?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_output(&args.out, &render("kernel", &rows, false))?;
    Ok(EXIT_OK)
}

/// The level on one side with the smallest budget at `t_max` among 24
/// candidates whose time limit exceeds `t_max`.
pub fn default_wf_level(wf: WfProblem, side: Side, interval: f64, k: usize, t_max: f64) -> Result<f64> {
    const CANDIDATES: usize = 24;
    let mut best: Option<(f64, f64)> = None;
    for j in 1..=CANDIDATES {
        let f = j as f64 / (CANDIDATES + 1) as f64;
        let level = match side {
            Side::Left => interval * f,
            Side::Right => interval + (1.0 - interval) * f,
        };
        let c = wf.constants(side, level, interval)?;
        if !(t_max < c.t_side) {
            continue;
        }
        let kern = WfKernel::new(wf, side, level, interval)?;
        let b = kern.budget(k, t_max)?;
        if best.is_none_or(|(b0, _)| b < b0) {
            best = Some((b, level));
        }
    }
    best.map(|(_, l)| l).ok_or_else(|| {
        Error::Region(format!("no {} level certifies t = {t_max} with I = {interval}", side.name()))
    })
}

fn wf_kernels(w: &WfConfig, k: usize, t_max: f64) -> Result<(Option<WfKernel>, Option<WfKernel>)> {
    let mut out = [None, None];
    for (i, (side, level)) in [(Side::Left, w.left), (Side::Right, w.right)].into_iter().enumerate() {
        let level = match level {
            Some(l) => Some(l),
            None => match default_wf_level(w.problem, side, w.interval, k, t_max) {
                Ok(l) => Some(l),
                Err(Error::Region(_)) => None,
                Err(e) => return Err(e),
            },
        };
        if let Some(l) = level {
            out[i] = Some(WfKernel::new(w.problem, side, l, w.interval)?);
        }
    }
    let [l, r] = out;
    Ok((l, r))
}

pub fn cmd_wf(args: &RunArgs) -> Result<i32> {
    let w = wright_fisher(args)?;
    let grid = Grid::parse(args.grid.as_deref().unwrap_or(""))?;
    let (y_axis, pts) = grid_points(&grid)?;
    if args.k == 0 {
        return Err(Error::Config("k: must be at least 1".into()));
    }
    let t_max = pts.iter().map(|p| p.2).fold(0.0, f64::max);
    let (left, right) = wf_kernels(&w, args.k, t_max)?;
    let values: Vec<Option<WfValue>> = collect_rows(&pts, args.allow_uncertified, |x, y, t| {
        wf_auto(left.as_ref(), right.as_ref(), args.k, x, y, t).map_err(|e| match e {
            Error::Precondition(m) => Error::Region(m),
            other => other,
        })
    })?;
    let mut rows: Vec<Option<Row>> = values
        .into_iter()
        .map(|v| {
            v.map(|v| Row {
                x: v.x,
                y: v.y,
                t: v.t,
                value: v.value,
                rel: v.relative_certificate,
                k: v.k,
                variant: "wf",
                side: Some(v.side.name()),
            })
        })
        .collect();
    let wf = w.problem;
    fill_mc(&mut rows, &pts, &y_axis, args, true, |x, t, cfg| sde::simulate_wf(&wf, x, t, cfg))?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_output(&args.out, &render("wf", &rows, true))?;
    Ok(EXIT_OK)
}

pub fn cmd_mc(args: &RunArgs) -> Result<i32> {
    let cfg_file = load_config(&args.config)?;
    let grid = Grid::parse(args.grid.as_deref().unwrap_or(""))?;
    let (xa, ya, ta) = (grid.axis("x")?, grid.axis("y")?, grid.axis("t")?);
    for (name, a) in [("x", xa), ("t", ta)] {
        if a.n != 1 {
            return Err(Error::Config(format!("grid.{name}: mc takes a single value")));
        }
    }
    let (x0, t) = (xa.lo, ta.lo);
    let cfg = mc_config(args, t)?;
    let ens = match &cfg_file {
        ProblemConfig::General(g) => sde::simulate_x(&g.problem, x0, t, &cfg)?,
        ProblemConfig::WrightFisher(w) => sde::simulate_wf(&w.problem, x0, t, &cfg)?,
    };
    let edges = sde::uniform_edges(ya.lo, ya.hi, ya.n)?;
    let h = sde::empirical_density(&ens, &edges)?;
    let mut s = csv_header(
        "mc",
        &["bin_lo", "bin_hi", "density", "std_err", "survivor_fraction", "absorbed_fraction"],
    );
    for i in 0..h.n_bins() {
        let (lo, hi) = h.bin(i);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(lo),
            fmt_f64(hi),
            fmt_f64(h.density[i]),
            fmt_f64(h.std_err[i]),
            fmt_f64(h.survivor_fraction),
            fmt_f64(h.absorbed_fraction)
        );
    }
    write_output(&args.out, &s)?;
    Ok(EXIT_OK)
}

/// One entry of a validation report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity or bound being checked.
    pub anchor: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, anchor: &str, measured: f64, threshold: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        anchor: anchor.into(),
        passed: measured.is_finite() && measured <= threshold,
        measured,
        threshold,
        detail,
    }
}

fn failed(name: &str, anchor: &str, e: Error) -> Check {
    Check {
        name: name.into(),
        anchor: anchor.into(),
        passed: false,
        measured: f64::NAN,
        threshold: f64::NAN,
        detail: e.to_string(),
    }
}

fn or_failed(name: &str, anchor: &str, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| failed(name, anchor, e))
}

/// Five-point Gauss–Legendre average of `f` over `[a, b]`.
pub fn bin_average<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64) -> Result<f64> {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    let mut s = 0.0;
    for i in 0..5 {
        s += W[i] * f(0.5 * (a + b) + 0.5 * (b - a) * X[i])?;
    }
    Ok(0.5 * s)
}

/// Worst `|MC − p̄| / max(3σ, certificate)` over histogram bins against a
/// bin-averaged approximation with its certificate.
pub fn density_agreement<F>(hist: &sde::Histogram, mut approx: F) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut worst: f64 = 0.0;
    let mut worst_bin = 0;
    for i in 0..hist.n_bins() {
        let (a, b) = hist.bin(i);
        let mut cert = 0.0f64;
        let value = bin_average(
            |y| {
                let (v, c) = approx(y)?;
                cert = cert.max(c);
                Ok(v)
            },
            a,
            b,
        )?;
        let allowed = (3.0 * hist.std_err[i]).max(cert);
        let ratio = if allowed > 0.0 {
            (hist.density[i] - value).abs() / allowed
        } else if hist.density[i] == value {
            0.0
        } else {
            f64::INFINITY
        };
        if ratio > worst {
            worst = ratio;
            worst_bin = i;
        }
    }
    Ok((worst, worst_bin))
}

fn general_suite(args: &RunArgs, g: &GeneralConfig) -> Result<Vec<Check>> {
    let model = build_model(g)?;
    let b = &model.bundle;
    let p: &Problem = &b.problem;
    let i = b.interval();
    let nu = b.nu;
    let mut checks = Vec::new();

    let qsym = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        for &(z, w, t) in &[(0.3, 1.7, 0.4), (1e-3, 0.02, 0.01), (2.0, 2.5, 3.0)] {
            let l = (1.0 - nu) * f64::ln(w) + ln_q(nu, z, w, t);
            let r = (1.0 - nu) * f64::ln(z) + ln_q(nu, w, z, t);
            worst = worst.max((l - r).abs());
        }
        Ok(check("model-kernel symmetry", "w^{1-nu} q(z,w,t) = z^{1-nu} q(w,z,t)", worst, 1e-12, format!("nu = {nu}")))
    };
    checks.push(or_failed("model-kernel symmetry", "w^{1-nu} q(z,w,t) = z^{1-nu} q(w,z,t)", qsym()));

    let cut = model.local_cut()?;
    let ksym = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        let t = 0.25 * b.t_i;
        for &(fx, fy) in &[(0.2, 0.5), (0.5, 0.9), (0.1, 0.3)] {
            worst = worst.max(model.symmetry_residual(fx * cut, fy * cut, t)?);
        }
        Ok(check(
            "kernel symmetry",
            "speed-measure symmetry of p^approx",
            worst,
            1e-8,
            format!("nu used = {nu}, nu computed = {}", compute_nu(p)),
        ))
    };
    checks.push(or_failed("kernel symmetry", "speed-measure symmetry of p^approx", ksym()));

    let ck = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        for &(z, w, t, s) in &[(1.0, 1.0, 0.5, 0.5), (0.2, 0.6, 0.1, 0.3)] {
            worst = worst.max(check_ck(nu, z, w, t, s, 1e-10)?);
        }
        Ok(check("chapman-kolmogorov", "Chapman-Kolmogorov equation for q", worst, 1e-7, String::new()))
    };
    checks.push(or_failed("chapman-kolmogorov", "Chapman-Kolmogorov equation for q", ck()));

    if b.frak_b >= nu {
        let cki = || -> Result<Check> {
            let r = crate::duhamel::ck_inequality_check(nu, b.frak_b, 0.5, 0.8, 0.3, 0.2)?;
            Ok(check("ck inequality", "CK inequality constant c", r, ck_constant(), format!("frak_b = {}", b.frak_b)))
        };
        checks.push(or_failed("ck inequality", "CK inequality constant c", cki()));
    }

    let env = || -> Result<Check> {
        let (z, w, t) = (0.3 * b.j / 9.0, 0.5 * b.j / 9.0, 0.3 * b.t_i);
        let term = model.perturbation.q_n_term(1, z, w, t, 1e-6)?;
        let ratio = if term.envelope > 0.0 { term.value.abs() / term.envelope } else { 0.0 };
        Ok(check("duhamel envelope", "|q_1| <= m_1(t) q", ratio, 1.0, format!("q_1 = {}", term.value)))
    };
    checks.push(or_failed("duhamel envelope", "|q_1| <= m_1(t) q", env()));

    // Monte Carlo checks.
    let scale = i.powf(2.0 - p.alpha);
    let hit = || -> Result<Check> {
        let (x0, y) = (0.2 * i, 0.6 * i);
        let exact = b.scale_s(x0)? / b.scale_s(y)?;
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(1e-4 * scale), args.seed).with_scheme(Scheme::parse(&args.scheme)?);
        let horizon = 50.0 * scale;
        let (ph, se, alive) = sde::exit_through_upper(|br| sde::simulate_x_with(p, x0, horizon, &cfg, br), y)?;
        let z = (ph - exact).abs() / se.max(1e-300);
        Ok(check("hitting ratio", "P(hit y before 0) = S(x)/S(y)", z, 3.0, format!("mc = {ph}, exact = {exact}, undecided = {alive}")))
    };
    checks.push(or_failed("hitting ratio", "P(hit y before 0) = S(x)/S(y)", hit()));

    let tail = || -> Result<Check> {
        let x0 = 0.5 * i;
        let t = 0.02 * scale;
        let bd = &b.bounds;
        let gap = (i - x0 - t * bd.b_i).max(0.0);
        let bound = (-(gap * gap) / (4.0 * t * i.powf(p.alpha) * bd.a_i)).exp();
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(t / DEFAULT_STEPS), args.seed.wrapping_add(1));
        cfg.check(t)?;
        let ens = sde::simulate_x_with(p, x0, t, &cfg, &Barriers { upper: Some(i), ..Barriers::default() })?;
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        Ok(check("hitting tail", "P(zeta_I <= t) <= exp(-(I-x-t b_I)^2/(4t I^alpha a_I))", freq, bound, format!("t = {t}")))
    };
    checks.push(or_failed("hitting tail", "P(zeta_I <= t) <= exp(-(I-x-t b_I)^2/(4t I^alpha a_I))", tail()));

    let dens = || -> Result<Check> {
        let t_probe = 0.05 * b.t_i;
        let loc = match g.localization {
            Some(gl) => model.localization(gl)?,
            None => model.default_g(0.5 * cut, t_probe, 2, BudgetVariant::Scale)?,
        };
        let t = (0.1 * loc.t_g).min(t_probe);
        let x0 = 0.4 * loc.x_cut;
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(t / DEFAULT_STEPS), args.seed.wrapping_add(2)).with_scheme(Scheme::parse(&args.scheme)?);
        cfg.check(t)?;
        let ens = sde::simulate_x(p, x0, t, &cfg)?;
        let edges = sde::uniform_edges(0.0, loc.x_cut * (1.0 - 1e-9), 30)?;
        let hist = sde::empirical_density(&ens, &edges)?;
        let (worst, bin) = density_agreement(&hist, |y| {
            let v = model.p_k_global(&loc, 2, x0, y.max(1e-12), t, BudgetVariant::Scale)?;
            Ok((v.value, v.certificate))
        })?;
        Ok(check("mc density", "MC histogram vs p^{2-approx} within max(3 sigma, certificate)", worst, 1.0, format!("worst bin {bin}, G = {}, t = {t}", loc.g)))
    };
    checks.push(or_failed("mc density", "MC histogram vs p^{2-approx} within max(3 sigma, certificate)", dens()));
    Ok(checks)
}

fn wf_suite(args: &RunArgs, w: &WfConfig) -> Result<Vec<Check>> {
    let wf = w.problem;
    let mut checks = Vec::new();
    let g = w.left.unwrap_or(0.6 * w.interval);
    let kern = WfKernel::new(wf, Side::Left, g, w.interval)?;
    let c = kern.constants;
    let nu = c.nu;

    let ck = || -> Result<Check> {
        let r = check_ck(nu, 0.3, 0.7, 0.2, 0.4, 1e-10)?;
        Ok(check("chapman-kolmogorov", "Chapman-Kolmogorov equation for q", r, 1e-7, format!("nu = {nu}")))
    };
    checks.push(or_failed("chapman-kolmogorov", "Chapman-Kolmogorov equation for q", ck()));

    let x_cut = {
        // largest x on a fine grid with phi(x) <= phi(G)/9
        let mut lo = 0.0;
        let mut hi = g;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if wf.phi(mid, Side::Left)? <= c.phi_level / 9.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let t = (0.05 * c.t_side).min(0.003);

    let sym = || -> Result<Check> {
        let (x, y) = (0.4 * x_cut, 0.9 * x_cut);
        let a = kern.value(2, x, y, t)?;
        let bck = kern.value(2, y, x, t)?;
        let r = wf_symmetry_residual(&wf, a.value, bck.value, x, y);
        Ok(check(
            "wf symmetry",
            "y^a(1-y)^b p(x,y,t) = x^a(1-x)^b p(y,x,t)",
            r,
            a.relative_certificate + bck.relative_certificate,
            format!("x = {x}, y = {y}, t = {t}"),
        ))
    };
    checks.push(or_failed("wf symmetry", "y^a(1-y)^b p(x,y,t) = x^a(1-x)^b p(y,x,t)", sym()));

    let hit = || -> Result<Check> {
        let (x0, y) = (0.2, 0.5);
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(1e-4), args.seed).with_scheme(Scheme::parse(&args.scheme)?);
        let p = Problem::wright_fisher(wf.alpha, wf.beta, 1.0);
        let (ph, se, alive) = sde::exit_through_upper(|br| sde::simulate_x_with(&p, x0, 50.0, &cfg, br), y)?;
        let z = (ph - x0 / y).abs() / se.max(1e-300);
        Ok(check("hitting ratio", "P(hit y before 0) = x/y", z, 3.0, format!("mc = {ph}, undecided = {alive}")))
    };
    checks.push(or_failed("hitting ratio", "P(hit y before 0) = x/y", hit()));

    let tail = || -> Result<Check> {
        let (x0, i, t) = (0.2, 0.5, 0.02);
        let bound = (-(i - x0) * (i - x0) / (4.0 * wf.m_ab() * t)).exp();
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(t / DEFAULT_STEPS), args.seed.wrapping_add(1));
        cfg.check(t)?;
        let p = Problem::wright_fisher(wf.alpha, wf.beta, 1.0);
        let ens = sde::simulate_x_with(&p, x0, t, &cfg, &Barriers { upper: Some(i), ..Barriers::default() })?;
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        Ok(check("hitting tail", "P(zeta_I <= t) <= exp(-(I-x)^2/(4 M t))", freq, bound, format!("t = {t}")))
    };
    checks.push(or_failed("hitting tail", "P(zeta_I <= t) <= exp(-(I-x)^2/(4 M t))", tail()));

    let dens = || -> Result<Check> {
        let x0 = 0.5 * x_cut;
        let cfg = McConfig::new(args.paths, args.dt.unwrap_or(t / DEFAULT_STEPS), args.seed.wrapping_add(2)).with_scheme(Scheme::parse(&args.scheme)?);
        cfg.check(t)?;
        let ens = sde::simulate_wf(&wf, x0, t, &cfg)?;
        let edges = sde::uniform_edges(0.0, x_cut, 30)?;
        let hist = sde::empirical_density(&ens, &edges)?;
        let (worst, bin) = density_agreement(&hist, |y| {
            let v = kern.value(2, x0, y.max(1e-12), t)?;
            Ok((v.value, v.certificate))
        })?;
        Ok(check("mc density", "MC histogram vs p^{2-approx} within max(3 sigma, certificate)", worst, 1.0, format!("worst bin {bin}, G = {g}, t = {t}")))
    };
    checks.push(or_failed("mc density", "MC histogram vs p^{2-approx} within max(3 sigma, certificate)", dens()));
    Ok(checks)
}

pub fn validate_report(args: &RunArgs) -> Result<Report> {
    let (suite, checks) = match load_config(&args.config)? {
        ProblemConfig::General(g) => ("general", general_suite(args, &g)?),
        ProblemConfig::WrightFisher(w) => ("wright_fisher", wf_suite(args, &w)?),
    };
    Ok(Report {
        suite: suite.into(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn cmd_validate(args: &RunArgs) -> Result<i32> {
    let report = validate_report(args)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Numerical(e.to_string()))?;
    write_output(&args.out, &(json + "\n"))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VALIDATION })
}

/// `q(x,y,t)` for the exact case, exposed for command-level oracles.
pub fn exact_case_q(x: f64, y: f64, t: f64) -> Result<f64> {
    Ok(eval_q(0.0, x, y, t)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = Grid::parse("x=0.1:0.2:3, y=0.05, t=0.01:0.01:1").unwrap();
        assert_eq!(g.x.unwrap().values(), vec![0.1, 0.15000000000000002, 0.2]);
        assert_eq!(g.y.unwrap().values(), vec![0.05]);
        for bad in ["x=0.1:0.2:0", "x=0.3:0.2:4", "z=1", "x=a:b:2", "x=1,x=2"] {
            let e = Grid::parse(bad).unwrap_err();
            assert_eq!(exit_code(&e), EXIT_CONFIG, "{bad}");
        }
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
