//! Coefficient description of `∂t = x^α a(x) ∂x² + b(x) ∂x`, sampled
//! hypothesis checks and local sup-norm bounds on a working interval.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// A real coefficient function. Must be reentrant.
pub type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of log-spaced probe points used for sup-norm estimation.
pub const SUP_GRID_POINTS: usize = 4096;
/// Inflation applied to grid estimates of `b_I`, `a′_I`, `b′_I`.
pub const SUP_SAFETY: f64 = 1.05;
/// Lower end of probe grids, relative to the interval length.
pub const GRID_FLOOR: f64 = 1e-12;

/// Coefficients, exponent and working interval of one problem.
#[derive(Clone)]
pub struct Problem {
    pub alpha: f64,
    pub a: Coef,
    pub a1: Option<Coef>,
    pub a2: Option<Coef>,
    pub b: Coef,
    pub b1: Option<Coef>,
    /// Right end `I` of the working interval `(0, I]`.
    pub interval: f64,
    /// `b` is known to vanish identically.
    pub drift_free: bool,
    /// Set for the Wright–Fisher family `a = (1-x)^β`, `b = 0`.
    pub wf_beta: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("alpha", &self.alpha)
            .field("interval", &self.interval)
            .field("drift_free", &self.drift_free)
            .field("wf_beta", &self.wf_beta)
            .field("exact_derivatives", &self.has_exact_derivatives())
            .finish()
    }
}

impl Problem {
    /// Problem with user coefficients and no derivative information.
    pub fn new(alpha: f64, a: Coef, b: Coef, interval: f64) -> Self {
        Self {
            alpha,
            a,
            a1: None,
            a2: None,
            b,
            b1: None,
            interval,
            drift_free: false,
            wf_beta: None,
        }
    }

    /// The pure-power case `a ≡ 1`, `b ≡ 0`.
    pub fn pure_power(alpha: f64, interval: f64) -> Self {
        let zero: Coef = Arc::new(|_| 0.0);
        Self {
            alpha,
            a: Arc::new(|_| 1.0),
            a1: Some(zero.clone()),
            a2: Some(zero.clone()),
            b: zero.clone(),
            b1: Some(zero),
            interval,
            drift_free: true,
            wf_beta: None,
        }
    }

    /// `a(x) = 1`, `b(x) = b0` constant drift.
    pub fn constant_drift(alpha: f64, b0: f64, interval: f64) -> Self {
        let zero: Coef = Arc::new(|_| 0.0);
        Self {
            alpha,
            a: Arc::new(|_| 1.0),
            a1: Some(zero.clone()),
            a2: Some(zero.clone()),
            b: Arc::new(move |_| b0),
            b1: Some(zero),
            interval,
            drift_free: b0 == 0.0,
            wf_beta: None,
        }
    }

    /// Wright–Fisher coefficients `a = (1-x)^β`, `b = 0` on `(0, I]`.
    pub fn wright_fisher(alpha: f64, beta: f64, interval: f64) -> Self {
        let zero: Coef = Arc::new(|_| 0.0);
        Self {
            alpha,
            a: Arc::new(move |x: f64| (1.0 - x).powf(beta)),
            a1: Some(Arc::new(move |x: f64| -beta * (1.0 - x).powf(beta - 1.0))),
            a2: Some(Arc::new(move |x: f64| beta * (beta - 1.0) * (1.0 - x).powf(beta - 2.0))),
            b: zero.clone(),
            b1: Some(zero),
            interval,
            drift_free: true,
            wf_beta: Some(beta),
        }
    }

    pub fn with_derivatives(mut self, a1: Coef, a2: Coef, b1: Coef) -> Self {
        self.a1 = Some(a1);
        self.a2 = Some(a2);
        self.b1 = Some(b1);
        self
    }

    /// Same coefficients on a different working interval.
    pub fn with_interval(&self, interval: f64) -> Self {
        let mut p = self.clone();
        p.interval = interval;
        p
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.a1.is_some() && self.a2.is_some() && self.b1.is_some()
    }

    pub fn a(&self, x: f64) -> f64 {
        (self.a)(x)
    }

    pub fn b(&self, x: f64) -> f64 {
        (self.b)(x)
    }

    /// Drift at the origin.
    pub fn b0(&self) -> f64 {
        if self.drift_free {
            0.0
        } else {
            self.b(0.0)
        }
    }

    pub fn a1(&self, x: f64) -> f64 {
        match &self.a1 {
            Some(f) => f(x),
            None => central_first(&self.a, x),
        }
    }

    pub fn a2(&self, x: f64) -> f64 {
        match &self.a2 {
            Some(f) => f(x),
            None => central_second(&self.a, x),
        }
    }

    pub fn b1(&self, x: f64) -> f64 {
        match &self.b1 {
            Some(f) => f(x),
            None => central_first(&self.b, x),
        }
    }
}

/// Finite-difference step `max(1e-6, 1e-6 x)`, kept inside `(0, ∞)`.
fn fd_step(x: f64) -> f64 {
    (1e-6f64).max(1e-6 * x).min(0.5 * x)
}

fn central_first(f: &Coef, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn central_second(f: &Coef, x: f64) -> f64 {
    // a wider step balances truncation against roundoff for f''
    let h = (1e-4f64).max(1e-4 * x).min(0.5 * x);
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Log-spaced grid of `n` points on `[floor·I, I]`.
pub fn log_grid(interval: f64, n: usize) -> Vec<f64> {
    let lo = (GRID_FLOOR * interval).ln();
    let hi = interval.ln();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                interval
            } else {
                (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// One failed hypothesis check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: String,
    pub at: Option<f64>,
    pub detail: String,
}

/// Outcome of [`validate_hypotheses`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Smallest `C` with `a ≤ C(1+x^{2-α})` and `|b| ≤ C(1+x)` on the grid.
    pub fitted_c: f64,
    /// Derivatives are approximated by finite differences.
    pub finite_differences: bool,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn push(v: &mut Vec<Violation>, condition: &str, at: Option<f64>, detail: String) {
    v.push(Violation {
        condition: condition.to_string(),
        at,
        detail,
    });
}

/// Samples the standing hypotheses on a log-spaced grid in `(0, I]`.
pub fn validate_hypotheses(p: &Problem, n_samples: usize) -> Result<ValidationReport> {
    if n_samples < 2 {
        return Err(Error::Precondition("n_samples must be at least 2".into()));
    }
    let mut out = Vec::new();
    let alpha = p.alpha;
    if !(alpha > 0.0 && alpha < 2.0) {
        push(&mut out, "alpha in (0,2)", None, format!("alpha = {alpha}"));
    }
    if !(p.interval > 0.0 && p.interval.is_finite()) {
        push(&mut out, "positive working interval", None, format!("I = {}", p.interval));
        return Ok(ValidationReport {
            violations: out,
            fitted_c: f64::NAN,
            finite_differences: !p.has_exact_derivatives(),
        });
    }
    let grid = log_grid(p.interval, n_samples);
    let mut fitted_c: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let a = p.a(x);
        let b = p.b(x);
        if !a.is_finite() {
            push(&mut out, "a finite", Some(x), format!("a({x:e}) = {a}"));
            continue;
        }
        if a <= 0.0 {
            push(&mut out, "a > 0", Some(x), format!("a({x:e}) = {a}"));
        }
        if !b.is_finite() {
            push(&mut out, "b finite", Some(x), format!("b({x:e}) = {b}"));
            continue;
        }
        for (name, v) in [("a'", p.a1(x)), ("a''", p.a2(x)), ("b'", p.b1(x))] {
            if !v.is_finite() {
                push(&mut out, &format!("{name} finite"), Some(x), format!("{name}({x:e}) = {v}"));
            }
        }
        if let Some((pa, pb)) = prev {
            if (a - pa).abs() > 1.0 + pa.abs().max(a.abs()) || (b - pb).abs() > 1.0 + pb.abs().max(b.abs()) {
                push(&mut out, "continuity", Some(x), format!("jump before x = {x:e}"));
            }
        }
        prev = Some((a, b));
        fitted_c = fitted_c.max(a / (1.0 + x.powf(2.0 - alpha))).max(b.abs() / (1.0 + x));
    }
    let a0 = extrapolate_to_zero(&grid[..3.min(grid.len())], |x| p.a(x));
    if (a0 - 1.0).abs() > 1e-9 {
        push(&mut out, "a(0) = 1", Some(0.0), format!("extrapolated a(0) = {a0}"));
    }
    let b0 = p.b(0.0);
    if !b0.is_finite() {
        push(&mut out, "b finite", Some(0.0), format!("b(0) = {b0}"));
    } else if alpha > 1.0 {
        if b0.abs() > 1e-12 {
            push(&mut out, "b(0)=0 required when α>1", Some(0.0), format!("b(0) = {b0}"));
        }
    } else if !(0.0..1.0).contains(&b0) {
        push(&mut out, "b(0) in [0,1) required when α≤1", Some(0.0), format!("b(0) = {b0}"));
    }
    Ok(ValidationReport {
        violations: out,
        fitted_c,
        finite_differences: !p.has_exact_derivatives(),
    })
}

/// Lagrange extrapolation to `x = 0` through the given abscissae.
fn extrapolate_to_zero(xs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= xs[j] / (xs[j] - xs[i]);
            }
        }
        acc += l * ys[i];
    }
    acc
}

/// Sup-norms of the coefficients on `[0, I]` and the drift factor `A_I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalBounds {
    pub interval: f64,
    /// `sup max(a, 1/a)`.
    pub a_i: f64,
    pub b_i: f64,
    pub a1_i: f64,
    pub b1_i: f64,
    pub big_a_i: f64,
}

/// Grid estimates of the sup-norms on `[0, I]`.
///
/// `a_I` is the grid maximum polished by golden-section search around the
/// best interior sample; the other norms carry the [`SUP_SAFETY`] factor.
pub fn local_bounds(p: &Problem) -> Result<LocalBounds> {
    let grid = log_grid(p.interval, SUP_GRID_POINTS);
    let ratio = |x: f64| {
        let a = p.a(x);
        a.max(1.0 / a)
    };
    let a_i = polished_max(&grid, ratio, "a")?.max(1.0);
    let b_i = if p.drift_free {
        0.0
    } else {
        polished_max(&grid, |x| p.b(x).abs(), "b")?.max(p.b(0.0).abs()) * SUP_SAFETY
    };
    let a1_i = polished_max(&grid, |x| p.a1(x).abs(), "a'")? * SUP_SAFETY;
    let b1_i = if p.drift_free {
        0.0
    } else {
        polished_max(&grid, |x| p.b1(x).abs(), "b'")? * SUP_SAFETY
    };
    let big_a_i = drift_factor(p.alpha, p.interval, a_i, b_i, a1_i, b1_i);
    Ok(LocalBounds {
        interval: p.interval,
        a_i,
        b_i,
        a1_i,
        b1_i,
        big_a_i,
    })
}

/// `A_I` from the three-way split on α.
pub fn drift_factor(alpha: f64, interval: f64, a_i: f64, b_i: f64, a1_i: f64, b1_i: f64) -> f64 {
    if alpha < 1.0 {
        (a_i * b_i * interval.powf(1.0 - alpha) / (2.0 * (1.0 - alpha))).exp()
    } else if alpha == 1.0 {
        (0.5 * a_i * a_i * (a_i * b1_i + a1_i * b_i) * interval).exp()
    } else {
        (a_i * b1_i * interval.powf(2.0 - alpha) / (2.0 * (2.0 - alpha))).exp()
    }
}

fn polished_max(grid: &[f64], f: impl Fn(f64) -> f64, name: &str) -> Result<f64> {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Numerical(format!("coefficient {name} is not finite at x = {x:e}")));
        }
        if v > best.1 {
            best = (i, v);
        }
    }
    let (i, mut m) = best;
    if i > 0 && i + 1 < grid.len() {
        // golden-section refinement between the neighbouring samples
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (grid[i - 1], grid[i + 1]);
        for _ in 0..60 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            let (f1, f2) = (f(x1), f(x2));
            m = m.max(f1).max(f2);
            if f1 > f2 {
                hi = x2;
            } else {
                lo = x1;
            }
        }
    }
    Ok(m)
}
