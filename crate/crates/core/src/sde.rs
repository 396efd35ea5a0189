//! Monte Carlo for `X`, the model process `Y` and the transformed process
//! `Z`, all killed at 0.
//!
//! Steps are Euler–Maruyama with full truncation. Killing between grid
//! points uses the Brownian-bridge crossing probability with the
//! diffusion frozen at the step start. Paths draw from their own ChaCha8
//! stream keyed by `(seed, path index)`, so results do not depend on the
//! worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::Problem;
use crate::error::{Error, Result};
use crate::wrightfisher::WfProblem;

/// Largest tolerated fraction of discarded paths.
pub const MAX_DISCARD_FRACTION: f64 = 1e-3;

/// Bridge exponents above this give crossing probabilities below `e^{-40}`.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Simulate `X` directly.
    EulerFullTruncation,
    /// Simulate `Z = X^{2−α}/(2−α)²` and map back.
    TransformedZ,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euler_full_truncation" | "euler" => Ok(Scheme::EulerFullTruncation),
            "transformed_z" | "z" => Ok(Scheme::TransformedZ),
            other => Err(Error::Config(format!(
                "scheme: unknown value {other:?} (expected euler_full_truncation or transformed_z)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    /// Worker count; `None` defers to `DEGENKERNEL_THREADS`.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        Self {
            n_paths,
            dt,
            seed,
            scheme: Scheme::EulerFullTruncation,
            threads: None,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    /// Checks `n_paths ≥ 1` and `dt ≤ t/100`.
    pub fn check(&self, t_max: f64) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("paths: must be at least 1".into()));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config(format!("t: horizon {t_max} must be positive")));
        }
        if !(self.dt > 0.0 && self.dt <= t_max / 100.0 * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "dt: {} must lie in (0, t/100] = (0, {}]",
                self.dt,
                t_max / 100.0
            )));
        }
        Ok(())
    }
}

/// Levels watched during a run, in the original `x` coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Barriers {
    /// Absorbing upper level.
    pub upper: Option<f64>,
    /// Level whose first hitting time is recorded; paths continue.
    pub watch: Option<f64>,
    /// `(G, I)` for counting completed `I → G` downward crossings.
    pub crossing: Option<(f64, f64)>,
    /// End a path at its first visit to `watch`.
    pub stop_on_watch: bool,
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEnsemble {
    pub n_paths: usize,
    pub t_max: f64,
    /// Terminal values of paths alive at `t_max`.
    pub terminal_values: Vec<f64>,
    pub absorbed_at_zero: usize,
    pub hit_right_boundary: usize,
    pub discarded: usize,
    /// First hitting times of the watched level (or the upper level when
    /// nothing is watched), in path order.
    pub hitting_times: Vec<f64>,
    /// Completed `I → G` crossings per path.
    pub crossing_counts: Vec<u32>,
    /// `η₂` for paths completing at least one crossing, in path order.
    pub first_crossing_times: Vec<f64>,
}

impl McEnsemble {
    pub fn alive(&self) -> usize {
        self.terminal_values.len()
    }

    /// Fraction with its binomial standard error.
    pub fn fraction(&self, count: usize) -> (f64, f64) {
        binomial(count, self.n_paths)
    }

    pub fn absorption_probability(&self) -> (f64, f64) {
        self.fraction(self.absorbed_at_zero)
    }

    /// Deterministic byte encoding for reproducibility checks.
    pub fn fingerprint(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for v in [self.n_paths, self.absorbed_at_zero, self.hit_right_boundary, self.discarded] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for v in self.terminal_values.iter().chain(&self.hitting_times).chain(&self.first_crossing_times) {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        for c in &self.crossing_counts {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }
}

/// `(p̂, √(p̂(1−p̂)/n))`.
pub fn binomial(count: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = count as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// A diffusion `dS = √v(S) dB + μ(S) dt` on `(0, ∞)` with coordinate maps.
trait Dynamics: Sync {
    fn var(&self, s: f64) -> f64;
    fn drift(&self, s: f64) -> f64;
    fn to_state(&self, x: f64) -> f64 {
        x
    }
    fn from_state(&self, s: f64) -> f64 {
        s
    }
    /// Distances from `s0` and `s1` to `level` in the coordinate where the
    /// volatility is one, with the nondegenerate factor of `v` frozen at
    /// `base`; `var = v(base)`.
    fn level_distances(&self, _base: f64, var: f64, s0: f64, s1: f64, level: f64) -> (f64, f64) {
        let sd = var.sqrt();
        ((s0 - level).abs() / sd, (s1 - level).abs() / sd)
    }
}

/// `∫₀^d u^{−p/2} du / √(2c)` at `d0` and `d1`, the unit-volatility
/// distances across a boundary where the variance vanishes like `2c u^p`.
fn degenerate_distances(d0: f64, d1: f64, p: f64, c: f64) -> (f64, f64) {
    let e = 1.0 - 0.5 * p;
    let scale = e * (2.0 * c).sqrt();
    let (d0, d1) = (d0.max(0.0), d1.max(0.0));
    if e == 0.5 {
        (d0.sqrt() / scale, d1.sqrt() / scale)
    } else {
        (d0.powf(e) / scale, d1.powf(e) / scale)
    }
}

struct XDynamics<'a>(&'a Problem);

impl Dynamics for XDynamics<'_> {
    fn var(&self, s: f64) -> f64 {
        2.0 * s.powf(self.0.alpha) * self.0.a(s)
    }
    fn drift(&self, s: f64) -> f64 {
        self.0.b(s)
    }
    fn level_distances(&self, base: f64, var: f64, s0: f64, s1: f64, level: f64) -> (f64, f64) {
        let p = self.0;
        match p.wf_beta {
            _ if level == 0.0 => degenerate_distances(s0, s1, p.alpha, p.a(base)),
            Some(beta) if level == 1.0 => degenerate_distances(1.0 - s0, 1.0 - s1, beta, base.powf(p.alpha)),
            _ => {
                let sd = var.sqrt();
                ((s0 - level).abs() / sd, (s1 - level).abs() / sd)
            }
        }
    }
}

struct ZDynamics<'a>(&'a Problem);

impl ZDynamics<'_> {
    fn x_of(&self, xi: f64) -> f64 {
        let two_minus = 2.0 - self.0.alpha;
        (two_minus * two_minus * xi).powf(1.0 / two_minus)
    }
}

impl Dynamics for ZDynamics<'_> {
    fn var(&self, s: f64) -> f64 {
        2.0 * s * self.0.a(self.x_of(s))
    }
    fn drift(&self, s: f64) -> f64 {
        let alpha = self.0.alpha;
        let x = self.x_of(s);
        (1.0 - alpha) / (2.0 - alpha) * self.0.a(x) + x.powf(1.0 - alpha) / (2.0 - alpha) * self.0.b(x)
    }
    fn to_state(&self, x: f64) -> f64 {
        let two_minus = 2.0 - self.0.alpha;
        x.powf(two_minus) / (two_minus * two_minus)
    }
    fn from_state(&self, s: f64) -> f64 {
        self.x_of(s)
    }
    fn level_distances(&self, base: f64, var: f64, s0: f64, s1: f64, level: f64) -> (f64, f64) {
        if level == 0.0 {
            degenerate_distances(s0, s1, 1.0, 0.5 * var / base)
        } else {
            let sd = var.sqrt();
            ((s0 - level).abs() / sd, (s1 - level).abs() / sd)
        }
    }
}

struct YDynamics(f64);

impl Dynamics for YDynamics {
    fn var(&self, s: f64) -> f64 {
        2.0 * s
    }
    fn drift(&self, _s: f64) -> f64 {
        self.0
    }
    fn level_distances(&self, _base: f64, var: f64, s0: f64, s1: f64, level: f64) -> (f64, f64) {
        if level == 0.0 {
            degenerate_distances(s0, s1, 1.0, 1.0)
        } else {
            let sd = var.sqrt();
            ((s0 - level).abs() / sd, (s1 - level).abs() / sd)
        }
    }
}

enum Fate {
    Alive(f64),
    Zero,
    Upper,
    Discarded,
}

struct PathOutcome {
    fate: Fate,
    hit_time: Option<f64>,
    crossings: u32,
    first_crossing: Option<f64>,
}

/// Whether a unit-volatility Brownian bridge from `l0` to `l1` (distances
/// to a level) touches the level within time `h`.
fn bridge_hit<R: Rng>(rng: &mut R, l0: f64, l1: f64, h: f64) -> bool {
    let e = 2.0 * l0 * l1 / h;
    e.is_finite() && e < BRIDGE_CUTOFF && rng.gen::<f64>() < (-e).exp()
}

/// Whether the step `s0 → s1` reaches `level`, approached from the side of `s0`.
#[allow(clippy::too_many_arguments)]
fn reaches<D: Dynamics, R: Rng>(rng: &mut R, dynamics: &D, base: f64, var: f64, s0: f64, s1: f64, level: f64, h: f64) -> bool {
    if s0 == level {
        return true;
    }
    let crossed = if s0 < level { s1 >= level } else { s1 <= level };
    if crossed {
        return true;
    }
    let (l0, l1) = dynamics.level_distances(base, var, s0, s1, level);
    bridge_hit(rng, l0, l1, h)
}

struct LevelsInState {
    upper: Option<f64>,
    watch: Option<f64>,
    crossing: Option<(f64, f64)>,
    stop_on_watch: bool,
}

fn simulate_path<D: Dynamics>(dynamics: &D, s0: f64, n_steps: usize, h: f64, levels: &LevelsInState, seed: u64, idx: usize) -> PathOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    let sqrt_h = h.sqrt();
    let mut s = s0;
    let mut hit_time = None;
    let mut crossings = 0u32;
    let mut first_crossing = None;
    let mut above_i = false;
    if let Some(w) = levels.watch {
        if s0 == w {
            hit_time = Some(0.0);
        }
    }
    let outcome = |fate, hit_time, crossings, first_crossing| PathOutcome {
        fate,
        hit_time,
        crossings,
        first_crossing,
    };
    for step in 0..n_steps {
        let t_end = (step + 1) as f64 * h;
        let base = s.max(0.0);
        let var = dynamics.var(base);
        let mu = dynamics.drift(base);
        if !(var.is_finite() && mu.is_finite()) {
            return outcome(Fate::Discarded, hit_time, crossings, first_crossing);
        }
        let var = var.max(0.0);
        let z: f64 = rng.sample(StandardNormal);
        let next = s + mu * h + var.sqrt() * sqrt_h * z;
        if next <= 0.0 || reaches(&mut rng, dynamics, base, var, s, next, 0.0, h) {
            return outcome(Fate::Zero, hit_time, crossings, first_crossing);
        }
        if let Some(u) = levels.upper {
            if reaches(&mut rng, dynamics, base, var, s, next, u, h) {
                if levels.watch.is_none() && hit_time.is_none() {
                    hit_time = Some(t_end);
                }
                return outcome(Fate::Upper, hit_time, crossings, first_crossing);
            }
        }
        if let (Some(w), None) = (levels.watch, hit_time) {
            if reaches(&mut rng, dynamics, base, var, s, next, w, h) {
                hit_time = Some(t_end);
                if levels.stop_on_watch {
                    return outcome(Fate::Alive(dynamics.from_state(next)), hit_time, crossings, first_crossing);
                }
            }
        }
        if let Some((g, i)) = levels.crossing {
            if !above_i {
                above_i = reaches(&mut rng, dynamics, base, var, s, next, i, h);
            } else if reaches(&mut rng, dynamics, base, var, s, next, g, h) {
                above_i = false;
                crossings += 1;
                if first_crossing.is_none() {
                    first_crossing = Some(t_end);
                }
            }
        }
        s = next;
    }
    outcome(Fate::Alive(dynamics.from_state(s)), hit_time, crossings, first_crossing)
}

fn run<D: Dynamics>(dynamics: &D, x0: f64, t_max: f64, cfg: &McConfig, barriers: &Barriers) -> Result<McEnsemble> {
    cfg.check(t_max)?;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::Domain(format!("x0 = {x0} must be positive")));
    }
    if let Some(u) = barriers.upper {
        if !(u > x0) {
            return Err(Error::Precondition(format!("upper level {u} must exceed x0 = {x0}")));
        }
    }
    if let Some((g, i)) = barriers.crossing {
        if !(0.0 < x0 && x0 < g && g < i) {
            return Err(Error::Precondition(format!("crossings need 0 < x0 < G < I, got x0 = {x0}, G = {g}, I = {i}")));
        }
    }
    let levels = LevelsInState {
        upper: barriers.upper.map(|u| dynamics.to_state(u)),
        watch: barriers.watch.map(|w| dynamics.to_state(w)),
        crossing: barriers.crossing.map(|(g, i)| (dynamics.to_state(g), dynamics.to_state(i))),
        stop_on_watch: barriers.stop_on_watch,
    };
    let s0 = dynamics.to_state(x0);
    let n_steps = (t_max / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_max / n_steps as f64;
    let seed = cfg.seed;
    let outcomes: Vec<PathOutcome> = crate::parallel::install(cfg.threads, || {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|idx| simulate_path(dynamics, s0, n_steps, h, &levels, seed, idx))
            .collect()
    });
    let mut ens = McEnsemble {
        n_paths: cfg.n_paths,
        t_max,
        terminal_values: Vec::new(),
        absorbed_at_zero: 0,
        hit_right_boundary: 0,
        discarded: 0,
        hitting_times: Vec::new(),
        crossing_counts: Vec::with_capacity(cfg.n_paths),
        first_crossing_times: Vec::new(),
    };
    for o in outcomes {
        match o.fate {
            Fate::Alive(x) => ens.terminal_values.push(x),
            Fate::Zero => ens.absorbed_at_zero += 1,
            Fate::Upper => ens.hit_right_boundary += 1,
            Fate::Discarded => ens.discarded += 1,
        }
        if let Some(t) = o.hit_time {
            ens.hitting_times.push(t);
        }
        if let Some(t) = o.first_crossing {
            ens.first_crossing_times.push(t);
        }
        ens.crossing_counts.push(o.crossings);
    }
    if ens.discarded as f64 > MAX_DISCARD_FRACTION * cfg.n_paths as f64 {
        return Err(Error::Simulation(format!(
            "{} of {} paths discarded after coefficient evaluation failures",
            ens.discarded, cfg.n_paths
        )));
    }
    Ok(ens)
}

/// Simulates `dX = √(2X^α a(X)) dB + b(X) dt` killed at 0.
pub fn simulate_x(p: &Problem, x0: f64, t_max: f64, cfg: &McConfig) -> Result<McEnsemble> {
    simulate_x_with(p, x0, t_max, cfg, &Barriers::default())
}

pub fn simulate_x_with(p: &Problem, x0: f64, t_max: f64, cfg: &McConfig, barriers: &Barriers) -> Result<McEnsemble> {
    match cfg.scheme {
        Scheme::EulerFullTruncation => run(&XDynamics(p), x0, t_max, cfg, barriers),
        Scheme::TransformedZ => run(&ZDynamics(p), x0, t_max, cfg, barriers),
    }
}

/// Simulates `dY = √(2Y) dB + ν dt` killed at 0. Both schemes coincide.
pub fn simulate_y(nu: f64, z0: f64, t_max: f64, cfg: &McConfig) -> Result<McEnsemble> {
    simulate_y_with(nu, z0, t_max, cfg, &Barriers::default())
}

pub fn simulate_y_with(nu: f64, z0: f64, t_max: f64, cfg: &McConfig, barriers: &Barriers) -> Result<McEnsemble> {
    run(&YDynamics(nu), z0, t_max, cfg, barriers)
}

/// Simulates `dX = √(2X^α(1−X)^β) dB` killed at 0 and 1. Paths reaching 1
/// are counted in `hit_right_boundary`.
pub fn simulate_wf(wf: &WfProblem, x0: f64, t_max: f64, cfg: &McConfig) -> Result<McEnsemble> {
    if !(x0 < 1.0) {
        return Err(Error::Domain(format!("x0 = {x0} must lie in (0,1)")));
    }
    let p = Problem::wright_fisher(wf.alpha, wf.beta, 1.0);
    let barriers = Barriers {
        upper: Some(1.0),
        ..Barriers::default()
    };
    simulate_x_with(&p, x0, t_max, cfg, &barriers)
}

/// `ℙ(η_{2n} ≤ t, η_{2n} < ζ₀)` estimates for `n = 1, 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingStats {
    pub n_paths: usize,
    pub g: f64,
    pub interval: f64,
    /// `[(p̂, σ̂)]` for one and two completed crossings.
    pub probabilities: [(f64, f64); 2],
    pub ensemble: McEnsemble,
}

pub fn count_downward_crossings(p: &Problem, x0: f64, g: f64, i: f64, t_max: f64, cfg: &McConfig) -> Result<CrossingStats> {
    let barriers = Barriers {
        crossing: Some((g, i)),
        ..Barriers::default()
    };
    let ens = simulate_x_with(p, x0, t_max, cfg, &barriers)?;
    let at_least = |n: u32| ens.crossing_counts.iter().filter(|&&c| c >= n).count();
    Ok(CrossingStats {
        n_paths: ens.n_paths,
        g,
        interval: i,
        probabilities: [binomial(at_least(1), ens.n_paths), binomial(at_least(2), ens.n_paths)],
        ensemble: ens,
    })
}

/// Exit problem from `(0, y)`: `(p̂, σ̂)` for leaving through `y`, plus the
/// fraction still inside at `t_max`.
pub fn exit_through_upper<F>(simulate: F, y: f64) -> Result<(f64, f64, f64)>
where
    F: FnOnce(&Barriers) -> Result<McEnsemble>,
{
    let barriers = Barriers {
        upper: Some(y),
        ..Barriers::default()
    };
    let ens = simulate(&barriers)?;
    let (p, se) = ens.fraction(ens.hit_right_boundary);
    Ok((p, se, ens.alive() as f64 / ens.n_paths as f64))
}

/// Sub-probability histogram: counts over `n_paths`, not over survivors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_paths: usize,
    pub survivor_fraction: f64,
    pub absorbed_fraction: f64,
    /// No surviving paths.
    pub empty: bool,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    /// `Σ density·width`.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.edges[i + 1] - self.edges[i]))
            .sum()
    }
}

/// `n` equal-width bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(hi > lo) {
        return Err(Error::Config(format!("bins: need n >= 1 and hi > lo, got {n} on [{lo}, {hi}]")));
    }
    Ok((0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect())
}

/// Histogram of survivors; values outside `edges` are counted as alive but
/// fall in no bin.
pub fn empirical_density(ens: &McEnsemble, edges: &[f64]) -> Result<Histogram> {
    if ens.n_paths == 0 {
        return Err(Error::Config("ensemble is empty".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("bins: edges must be strictly increasing".into()));
    }
    let n_bins = edges.len() - 1;
    let mut counts = vec![0usize; n_bins];
    for &v in &ens.terminal_values {
        if v < edges[0] || v > edges[n_bins] {
            continue;
        }
        let k = edges.partition_point(|&e| e <= v).saturating_sub(1).min(n_bins - 1);
        counts[k] += 1;
    }
    let n = ens.n_paths as f64;
    let mut density = Vec::with_capacity(n_bins);
    let mut std_err = Vec::with_capacity(n_bins);
    for (i, &c) in counts.iter().enumerate() {
        let width = edges[i + 1] - edges[i];
        let (p, se) = binomial(c, ens.n_paths);
        density.push(p / width);
        std_err.push(se / width);
    }
    let absorbed_fraction = (ens.n_paths - ens.alive()) as f64 / n;
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        density,
        std_err,
        n_paths: ens.n_paths,
        survivor_fraction: 1.0 - absorbed_fraction,
        absorbed_fraction,
        empty: ens.alive() == 0,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    if a.is_empty() || b.is_empty() {
        return (0.0, 1.0);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson χ² p-value of `counts` against expected counts; bins with
/// expectation below 5 are pooled into their neighbour.
pub fn chi_square_p_value(counts: &[usize], expected: &[f64], fitted_params: usize) -> Result<(f64, f64, usize)> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    if counts.len() != expected.len() {
        return Err(Error::Precondition("counts and expectations differ in length".into()));
    }
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&c, &e) in counts.iter().zip(expected) {
        acc.0 += c as f64;
        acc.1 += e;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let stat: f64 = pooled.iter().map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else { 0.0 }).sum();
    let dof = pooled.len().saturating_sub(1 + fitted_params).max(1);
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat), dof))
}
