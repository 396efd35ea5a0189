//! Special functions: gamma-family wrappers and the exponentially scaled
//! modified Bessel function of the first kind.

use std::sync::OnceLock;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Euler beta function `B(a, b)` for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Minimum of the gamma function on `[1, 2]`, located by golden-section
/// search (about 0.8856 at 1.4616).
pub fn gamma_min_on_unit_interval() -> (f64, f64) {
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    *CELL.get_or_init(|| {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (gamma(x1), gamma(x2));
        while hi - lo > 1e-12 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = gamma(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = gamma(x2);
            }
        }
        let x = 0.5 * (lo + hi);
        (x, gamma(x))
    })
}

/// The constant `1 / min_{[1,2]} Γ` used in the Chapman–Kolmogorov
/// inequality for the model kernel.
pub fn ck_constant() -> f64 {
    1.0 / gamma_min_on_unit_interval().1
}

/// Logarithm of `exp(-x) I_mu(x)` with bookkeeping on the series length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledBessel {
    pub ln_value: f64,
    pub terms: usize,
    /// Bound on the relative truncation error of the returned value.
    pub rel_truncation: f64,
}

/// Argument above which the large-argument expansion replaces the series.
pub const BESSEL_SERIES_LIMIT: f64 = 30.0;

/// `ln(exp(-x) I_mu(x))` for `mu >= 0`, `x >= 0`.
///
/// Power series up to `x = 30`. Above, the Hankel large-argument expansion
/// when it converges to full precision (`x ≫ μ²`), otherwise the power
/// series summed outward from its largest term.
pub fn ln_bessel_i_scaled(mu: f64, x: f64) -> ScaledBessel {
    debug_assert!(mu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        let ln_value = if mu == 0.0 { 0.0 } else { f64::NEG_INFINITY };
        return ScaledBessel {
            ln_value,
            terms: 1,
            rel_truncation: 0.0,
        };
    }
    if x <= BESSEL_SERIES_LIMIT {
        return series(mu, x);
    }
    let a = asymptotic(mu, x);
    if a.rel_truncation <= 1e-16 {
        a
    } else {
        centred_series(mu, x)
    }
}

/// The power series with terms scaled by the largest one, so it neither
/// overflows nor needs the leading terms.
fn centred_series(mu: f64, x: f64) -> ScaledBessel {
    let half = 0.5 * x;
    let q = half * half;
    let peak = ((-mu + (mu * mu + 4.0 * q).sqrt()) / 2.0).floor().max(0.0);
    let ln_peak = (2.0 * peak + mu) * half.ln() - ln_gamma(peak + 1.0) - ln_gamma(peak + mu + 1.0);
    let mut sum = 1.0f64;
    let mut terms = 1usize;

    let mut term = 1.0f64;
    let mut k = peak;
    let rel_truncation = loop {
        k += 1.0;
        term *= q / (k * (k + mu));
        sum += term;
        terms += 1;
        let ratio = q / ((k + 1.0) * (k + 1.0 + mu));
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-17 * sum {
            break term * ratio / (1.0 - ratio) / sum;
        }
    };

    let mut term = 1.0f64;
    let mut k = peak;
    while k > 0.0 {
        term *= k * (k + mu) / q;
        k -= 1.0;
        sum += term;
        terms += 1;
        if term <= 1e-17 * sum {
            break;
        }
    }
    ScaledBessel {
        ln_value: ln_peak + sum.ln() - x,
        terms,
        rel_truncation,
    }
}

fn series(mu: f64, x: f64) -> ScaledBessel {
    let q = 0.25 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0usize;
    let rel_truncation;
    loop {
        k += 1;
        let kf = k as f64;
        term *= q / (kf * (kf + mu));
        sum += term;
        let ratio = q / ((kf + 1.0) * (kf + 1.0 + mu));
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-17 * sum {
            rel_truncation = term * ratio / (1.0 - ratio) / sum;
            break;
        }
    }
    ScaledBessel {
        ln_value: mu * (0.5 * x).ln() - x - ln_gamma(mu + 1.0) + sum.ln(),
        terms: k + 1,
        rel_truncation,
    }
}

fn asymptotic(mu: f64, x: f64) -> ScaledBessel {
    let m4 = 4.0 * mu * mu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (m4 - odd * odd) / (8.0 * kf * x);
        if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() || k > 60 {
            return ScaledBessel {
                ln_value: sum.ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln(),
                terms: k,
                rel_truncation: next.abs() / sum.abs(),
            };
        }
        term = next;
        sum += term;
    }
}
