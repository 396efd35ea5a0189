//! The model kernel `q(z, w, t)` of `∂t = z ∂z² + ν ∂z` killed at 0, the
//! hitting formulas of the model process and the localisation ratio bound.

use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod_breaks, tanh_sinh, QuadPolicy, QuadResult};
use crate::special::{gamma, ln_bessel_i_scaled, ln_gamma};
use crate::transform::TransformBundle;

/// Largest ν accepted by the kernel evaluators.
pub const NU_MAX: f64 = 0.999;

/// Value of `q` together with its logarithm and series bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QEval {
    pub value: f64,
    pub log_value: f64,
    pub terms_used: usize,
    /// Absolute bound on the truncation error of `value`.
    pub truncation_bound: f64,
}

/// Certified bound on `r = q − q_J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RBound {
    pub value: f64,
}

fn check_args(nu: f64, z: f64, w: f64, t: f64) -> Result<()> {
    if !(nu.is_finite() && nu <= NU_MAX) {
        return Err(Error::Domain(format!("nu = {nu} must satisfy nu <= {NU_MAX}")));
    }
    for (name, v) in [("z", z), ("w", w), ("t", t)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} = {v} must be positive and finite")));
        }
    }
    Ok(())
}

/// `ln q(z, w, t)` without argument checks; the hot path of every
/// quadrature in the crate.
#[inline]
pub fn ln_q(nu: f64, z: f64, w: f64, t: f64) -> f64 {
    ln_q_parts(nu, z, w, t).0
}

#[inline]
fn ln_q_parts(nu: f64, z: f64, w: f64, t: f64) -> (f64, usize, f64) {
    let mu = 1.0 - nu;
    let (sz, sw) = (z.sqrt(), w.sqrt());
    let diff = (z - w) / (sz + sw);
    let x = 2.0 * sz * sw / t;
    let bessel = ln_bessel_i_scaled(mu, x);
    let ln = -diff * diff / t + 0.5 * mu * (z.ln() - w.ln()) - t.ln() + bessel.ln_value;
    (ln, bessel.terms, bessel.rel_truncation)
}

/// `q(z,w,t) = z^{(1-ν)/2} w^{(ν-1)/2} t^{-1} e^{-(z+w)/t} I_{1-ν}(2√(zw)/t)`,
/// evaluated in log space through the scaled Bessel function.
pub fn eval_q(nu: f64, z: f64, w: f64, t: f64) -> Result<QEval> {
    check_args(nu, z, w, t)?;
    let (ln, terms, rel) = ln_q_parts(nu, z, w, t);
    let value = ln.exp();
    Ok(QEval {
        value,
        log_value: ln,
        terms_used: terms,
        truncation_bound: rel * value,
    })
}

/// `q` through its power series
/// `z^{1-ν} t^{ν-2} e^{-(z+w)/t} Σ (zw)^n / (t^{2n} n! Γ(n+2-ν))`,
/// summed in log space. Independent of the Bessel route.
pub fn eval_q_series(nu: f64, z: f64, w: f64, t: f64) -> Result<QEval> {
    check_args(nu, z, w, t)?;
    let ln_x = z.ln() + w.ln() - 2.0 * t.ln();
    let x = ln_x.exp();
    // terms peak near n ≈ √x; sum outward from n = 0 with a running maximum
    let mut ln_term = -ln_gamma(2.0 - nu);
    let mut ln_max = ln_term;
    let mut acc = 1.0;
    let mut n = 0usize;
    let rel_truncation;
    loop {
        n += 1;
        let nf = n as f64;
        ln_term += ln_x - nf.ln() - (nf + 1.0 - nu).ln();
        if ln_term > ln_max {
            acc = acc * (ln_max - ln_term).exp() + 1.0;
            ln_max = ln_term;
        } else {
            acc += (ln_term - ln_max).exp();
        }
        let ratio = x / ((nf + 1.0) * (nf + 2.0 - nu));
        if ratio < 1.0 {
            let tail = (ln_term - ln_max).exp() * ratio / (1.0 - ratio);
            if tail <= 1e-17 * acc {
                rel_truncation = tail / acc;
                break;
            }
        }
    }
    let ln = (1.0 - nu) * z.ln() + (nu - 2.0) * t.ln() - (z + w) / t + ln_max + acc.ln();
    let value = ln.exp();
    Ok(QEval {
        value,
        log_value: ln,
        terms_used: n + 1,
        truncation_bound: rel_truncation * value,
    })
}

/// The two sides of the pointwise estimate
/// `z^{1-ν} e^{-(z+w)/t} / (t^{2-ν} Γ(2-ν)) ≤ q ≤ z^{1-ν} t^{ν-2} e^{-(√z-√w)²/t}`,
/// returned as logarithms.
pub fn ln_q_bounds(nu: f64, z: f64, w: f64, t: f64) -> (f64, f64) {
    let base = (1.0 - nu) * z.ln() + (nu - 2.0) * t.ln();
    let d = (z - w) / (z.sqrt() + w.sqrt());
    (base - (z + w) / t - ln_gamma(2.0 - nu), base - d * d / t)
}

/// Scale of `ξ ↦ q(c, ξ, t)` around its centre `c`.
pub fn spread(c: f64, t: f64) -> f64 {
    (2.0 * c * t).sqrt() + t
}

/// Integrates `exp(g(ξ))` over `(0, ∞)` for a log-integrand concentrated
/// near the given `(centre, spread)` pairs. The range is cut where `g`
/// falls 700 below its largest sampled value.
pub fn integrate_half_line<G: FnMut(f64) -> f64>(g: G, centres: &[(f64, f64)], policy: &QuadPolicy) -> QuadResult {
    integrate_half_line_weighted(g, |_| 1.0, centres, &DENSE_OFFSETS, &[], policy.abs_tol, policy)
}

/// Breakpoint offsets, in spreads, used by [`integrate_half_line`].
pub const DENSE_OFFSETS: [f64; 5] = [0.5, 1.5, 3.0, 6.0, 12.0];

/// Integrates `exp(g(ξ)) h(ξ)` over `(0, ∞)`. `h` may change sign; `abs_tol`
/// is in the units of the result. `extra` adds fixed breakpoints, e.g. where
/// `h` jumps.
pub fn integrate_half_line_weighted<G, H>(
    mut g: G,
    mut h: H,
    centres: &[(f64, f64)],
    offsets: &[f64],
    extra: &[f64],
    abs_tol: f64,
    policy: &QuadPolicy,
) -> QuadResult
where
    G: FnMut(f64) -> f64,
    H: FnMut(f64) -> f64,
{
    let mut pts: Vec<f64> = Vec::with_capacity(2 * offsets.len() * centres.len() + centres.len() + extra.len() + 2);
    let mut far: f64 = 0.0;
    let reach = offsets.iter().copied().fold(1.0, f64::max);
    for &(c, s) in centres {
        pts.push(c);
        for &k in offsets {
            pts.push(c - k * s);
            pts.push(c + k * s);
        }
        far = far.max(c + reach * s);
    }
    pts.retain(|&p| p > 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let peak = pts.iter().map(|&p| g(p)).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: pts.len(),
            converged: peak == f64::NEG_INFINITY,
        };
    }
    // extend the upper end until the integrand is negligible
    let mut upper = far;
    let mut steps = 0;
    while g(upper) > peak - 700.0 && steps < 200 {
        pts.push(upper * 2.0);
        upper *= 2.0;
        steps += 1;
    }
    let first = pts[0];
    let mut rest: Vec<f64> = pts.into_iter().filter(|&p| p < upper * (1.0 + 1e-15)).collect();
    rest.extend(extra.iter().copied().filter(|&p| p > first && p < upper));
    rest.push(upper);
    rest.sort_by(f64::total_cmp);
    rest.dedup();
    let scale = peak.exp();
    let scaled_tol = (abs_tol / scale).min(f64::MAX);
    let body_policy = QuadPolicy {
        abs_tol: scaled_tol,
        ..*policy
    };
    let body = gauss_kronrod_breaks(|x| (g(x) - peak).exp() * h(x), &rest, &body_policy);
    let head_policy = QuadPolicy {
        abs_tol: (policy.rel_tol * body.value.abs()).max(scaled_tol).max(f64::MIN_POSITIVE),
        ..*policy
    };
    let head = tanh_sinh(|x| (g(x) - peak).exp() * h(x), 0.0, first, &head_policy);
    let sum = body.combine(head);
    QuadResult {
        value: sum.value * scale,
        abs_error: sum.abs_error * scale,
        evaluations: sum.evaluations,
        converged: sum.converged || sum.abs_error <= policy.rel_tol * sum.value.abs() || sum.abs_error <= scaled_tol,
    }
}

/// Relative Chapman–Kolmogorov residual
/// `|q(z,w,t+s) − ∫ q(z,ξ,t) q(ξ,w,s) dξ| / q(z,w,t+s)`.
pub fn check_ck(nu: f64, z: f64, w: f64, t: f64, s: f64, quad_tol: f64) -> Result<f64> {
    check_args(nu, z, w, t)?;
    check_args(nu, z, w, s)?;
    let target = ln_q(nu, z, w, t + s);
    let policy = QuadPolicy::with_rel_tol(quad_tol);
    let r = integrate_half_line(
        |xi| ln_q(nu, z, xi, t) + ln_q(nu, xi, w, s) - target,
        &[(z, spread(z, t)), (w, spread(w, s))],
        &policy,
    );
    if !r.value.is_finite() {
        return Err(Error::Numerical("Chapman–Kolmogorov quadrature failed".into()));
    }
    Ok((r.value - 1.0).abs())
}

/// Survival probability `∫₀^∞ q(z, w, t) dw`, clipped to `[0, 1]`.
pub fn mass_q(nu: f64, z: f64, t: f64) -> Result<f64> {
    check_args(nu, z, 1.0, t)?;
    let r = integrate_half_line(|w| ln_q(nu, z, w, t), &[(z, spread(z, t))], &QuadPolicy::default());
    if !r.value.is_finite() {
        return Err(Error::Numerical("mass quadrature failed".into()));
    }
    Ok(r.value.clamp(0.0, 1.0))
}

/// `P(ζ_J ≤ ζ₀) = (z/J)^{1-ν}` for the model process from `z`.
pub fn y_hit_prob(nu: f64, z: f64, j: f64) -> Result<f64> {
    if !(z > 0.0 && z <= j) || nu >= 1.0 {
        return Err(Error::Precondition(format!("need 0 < z <= J and nu < 1, got z = {z}, J = {j}, nu = {nu}")));
    }
    Ok((z / j).powf(1.0 - nu))
}

/// Tail bound `P(ζ_J ≤ t) ≤ exp(−(J−z−tν)²/(4tJ))`, valid for `J − z ≥ |ν| t`.
pub fn y_hit_tail(nu: f64, z: f64, j: f64, t: f64) -> Result<f64> {
    if !(z > 0.0 && z < j && t > 0.0) {
        return Err(Error::Precondition(format!("need 0 < z < J and t > 0, got z = {z}, J = {j}, t = {t}")));
    }
    if j - z < nu.abs() * t {
        return Err(Error::Precondition(format!(
            "tail bound needs J - z >= |nu| t, got J - z = {}, |nu| t = {}",
            j - z,
            nu.abs() * t
        )));
    }
    let d = j - z - t * nu;
    Ok((-d * d / (4.0 * t * j)).exp())
}

/// `sup |q_J/q − 1|` over `(0, J/9)²`, certified as `exp(−2J/(9t))` for
/// `t < t_J`.
pub fn q_ratio_bound(bundle: &TransformBundle, t: f64) -> Result<f64> {
    ratio_bound(bundle.j, bundle.nu, t)
}

pub(crate) fn ratio_bound(j: f64, nu: f64, t: f64) -> Result<f64> {
    let t_j = 4.0 * j / (9.0 * (2.0 - nu));
    if !(t > 0.0 && t < t_j) {
        return Err(Error::Precondition(format!("t = {t} must lie in (0, t_J) with t_J = {t_j}")));
    }
    Ok((-2.0 * j / (9.0 * t)).exp())
}

/// Bound on `r(z,w,t) = q − q_J` for `z, w ∈ (0, J/9)`.
pub fn r_bound(bundle: &TransformBundle, z: f64, w: f64, t: f64) -> Result<RBound> {
    let j = bundle.j;
    for (name, v) in [("z", z), ("w", w)] {
        if !(v > 0.0 && v < j / 9.0) {
            return Err(Error::Precondition(format!("{name} = {v} must lie in (0, J/9) with J/9 = {}", j / 9.0)));
        }
    }
    let ratio = q_ratio_bound(bundle, t)?;
    Ok(RBound {
        value: ratio * eval_q(bundle.nu, z, w, t)?.value,
    })
}

/// Lower incomplete-gamma closed form of the survival probability, used
/// as an oracle: `∫ q dw = P(1-ν, z/t)`.
pub fn mass_q_closed_form(nu: f64, z: f64, t: f64) -> f64 {
    statrs::function::gamma::gamma_lr(1.0 - nu, z / t)
}

/// `Γ(2-ν)`, exposed for callers of the pointwise estimate.
pub fn gamma_two_minus(nu: f64) -> f64 {
    gamma(2.0 - nu)
}
