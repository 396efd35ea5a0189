//! Change of variables `z = φ(x)` that turns `x^α a ∂x² + b ∂x` into
//! `z ∂z² + ν ∂z + V(z)` after conjugation by `Θ`.
//!
//! Every quantity is evaluated through the normalised integral
//! `R(x) = ∫₀¹ a(x v^{2/(2-α)})^{-1/2} dv`, for which
//! `φ(x) = x^{2-α} R(x)² / (2-α)²`. Writing θ and `θ′/φ′` in terms of the
//! small quantity `w = R√a − 1` keeps them accurate as `x ↘ 0`, where the
//! textbook expressions are `0/0`.

use serde::Serialize;

use crate::coeffs::{local_bounds, log_grid, LocalBounds, Problem, GRID_FLOOR, SUP_GRID_POINTS, SUP_SAFETY};
use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod, tanh_sinh, QuadPolicy};
use crate::special::ck_constant;

/// `ν = (1-α)/(2-α)` for `α ≠ 1` and `ν = b(0)` for `α = 1`.
pub fn compute_nu(p: &Problem) -> f64 {
    if p.alpha == 1.0 {
        p.b0()
    } else {
        (1.0 - p.alpha) / (2.0 - p.alpha)
    }
}

/// Exponent `𝔟` in the bound `|V(z)| ≤ V_I z^{𝔟-1}`.
pub fn compute_frak_b(p: &Problem) -> f64 {
    let nu = compute_nu(p);
    if p.alpha >= 1.0 {
        1.0
    } else if p.b0() != 0.0 {
        nu
    } else {
        1.0 - nu
    }
}

/// How `V_I` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VBoundKind {
    /// Grid supremum times a safety factor.
    Fitted,
    /// Closed-form constant.
    Exact,
}

/// A value of θ or `V∘φ`, flagged when the argument was raised to the
/// evaluation floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Floored {
    pub value: f64,
    pub floored: bool,
}

/// Diagnostics recorded while building a bundle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDiagnostics {
    pub probe_points: usize,
    pub roundtrip_max_rel: f64,
    pub theta_sandwich_ok: bool,
    pub v_bound_ok: bool,
    /// Largest `|V(φ(x))| φ(x)^{1-𝔟}` seen on the probe grid.
    pub v_grid_sup: f64,
}

/// Serializable summary of a bundle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleSnapshot {
    pub alpha: f64,
    pub interval: f64,
    pub nu: f64,
    pub j: f64,
    pub theta_i: f64,
    pub v_i: f64,
    pub v_i_kind: VBoundKind,
    pub frak_b: f64,
    pub frak_c: f64,
    pub t_i: f64,
    pub bounds: LocalBounds,
    pub diagnostics: GridDiagnostics,
}

/// The transformation data for one problem on its working interval.
#[derive(Clone, Debug)]
pub struct TransformBundle {
    pub problem: Problem,
    pub nu: f64,
    /// `J = φ(I)`.
    pub j: f64,
    pub theta_i: f64,
    pub v_i: f64,
    pub v_i_kind: VBoundKind,
    pub frak_b: f64,
    pub frak_c: f64,
    /// `t_I = 4J / (9(2-ν))`.
    pub t_i: f64,
    pub bounds: LocalBounds,
    pub diagnostics: GridDiagnostics,
    /// ν used by the model kernel differs from the computed one (test fixture).
    pub nu_overridden: bool,
    x_min: f64,
    policy: QuadPolicy,
}

/// `Θ_I = ((1-α/2)^{ν-1/2} ∨ √2) a_I^{(1-ν)/2} A_I`.
pub fn theta_constant(alpha: f64, nu: f64, bounds: &LocalBounds) -> f64 {
    (1.0 - alpha / 2.0).powf(nu - 0.5).max(2f64.sqrt()) * bounds.a_i.powf(0.5 * (1.0 - nu)) * bounds.big_a_i
}

/// Closed-form `V_I` for `a = (1-x)^β`, `b = 0` on `(0, I]`.
pub fn wf_v_constant(alpha: f64, beta: f64, interval: f64) -> f64 {
    beta / 16.0 * (4.0 - beta + 2.0 * alpha) * (1.0 - interval).powf(beta / (2.0 - alpha) - 2.0)
}

impl TransformBundle {
    /// Builds the bundle: local bounds, `J`, `Θ_I`, `V_I`, `𝔟`, `𝔠`, `t_I`
    /// and probe-grid diagnostics.
    pub fn new(problem: Problem) -> Result<Self> {
        let alpha = problem.alpha;
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha = {alpha} outside (0,2)")));
        }
        if !(problem.interval > 0.0) {
            return Err(Error::Domain(format!("working interval I = {} must be positive", problem.interval)));
        }
        let bounds = local_bounds(&problem)?;
        let nu = compute_nu(&problem);
        if nu >= 1.0 {
            return Err(Error::Domain(format!("nu = {nu} must be below 1")));
        }
        let frak_b = compute_frak_b(&problem);
        let mut bundle = TransformBundle {
            nu,
            j: 0.0,
            theta_i: theta_constant(alpha, nu, &bounds),
            v_i: 0.0,
            v_i_kind: VBoundKind::Fitted,
            frak_b,
            frak_c: ck_constant(),
            t_i: 0.0,
            bounds,
            diagnostics: GridDiagnostics {
                probe_points: SUP_GRID_POINTS,
                roundtrip_max_rel: 0.0,
                theta_sandwich_ok: true,
                v_bound_ok: true,
                v_grid_sup: 0.0,
            },
            nu_overridden: false,
            x_min: GRID_FLOOR * problem.interval,
            policy: QuadPolicy::default(),
            problem,
        };
        bundle.j = bundle.phi(bundle.problem.interval)?;
        bundle.t_i = 4.0 * bundle.j / (9.0 * (2.0 - nu));

        let grid = log_grid(bundle.problem.interval, SUP_GRID_POINTS);
        let mut sup: f64 = 0.0;
        let mut sandwich = true;
        for &x in &grid[..grid.len() - 1] {
            let z = bundle.phi(x)?;
            let v = bundle.v_of_phi(x).value;
            if !v.is_finite() {
                return Err(Error::Numerical(format!("V(phi(x)) not finite at x = {x:e}")));
            }
            sup = sup.max(v.abs() * z.powf(1.0 - frak_b));
            let th = bundle.theta_big_of_phi(x)?;
            sandwich &= th * bundle.theta_i >= 1.0 - 1e-12 && th <= bundle.theta_i * (1.0 + 1e-12);
        }
        bundle.diagnostics.v_grid_sup = sup;
        bundle.diagnostics.theta_sandwich_ok = sandwich;
        match bundle.problem.wf_beta {
            Some(beta) => {
                bundle.v_i = wf_v_constant(alpha, beta, bundle.problem.interval);
                bundle.v_i_kind = VBoundKind::Exact;
                bundle.diagnostics.v_bound_ok = sup <= bundle.v_i;
            }
            None => {
                bundle.v_i = sup * SUP_SAFETY;
                bundle.v_i_kind = VBoundKind::Fitted;
            }
        }

        let probes = log_grid(bundle.problem.interval, 256);
        let mut worst: f64 = 0.0;
        for &x in &probes {
            let back = bundle.psi(bundle.phi(x)?)?;
            worst = worst.max((back - x).abs() / x);
        }
        bundle.diagnostics.roundtrip_max_rel = worst;
        Ok(bundle)
    }

    /// Replaces ν as seen by the model kernel. Only for negative controls.
    pub fn with_nu_override(mut self, nu: f64) -> Self {
        self.nu = nu;
        self.nu_overridden = true;
        self
    }

    pub fn interval(&self) -> f64 {
        self.problem.interval
    }

    pub fn alpha(&self) -> f64 {
        self.problem.alpha
    }

    /// Evaluation floor for θ and `V∘φ`.
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    fn power(&self) -> f64 {
        2.0 / (2.0 - self.problem.alpha)
    }

    /// `R(x)`; equals 1 when `a ≡ 1`.
    pub fn r_factor(&self, x: f64) -> Result<f64> {
        let p = self.power();
        let a = &self.problem.a;
        let r = gauss_kronrod(|v| 1.0 / a(x * v.powf(p)).sqrt(), 0.0, 1.0, &self.policy);
        if !r.converged {
            return Err(Error::Numerical(format!(
                "phi quadrature at x = {x:e} reached {:e} relative",
                r.abs_error / r.value.abs()
            )));
        }
        Ok(r.value)
    }

    /// `w(x) = R(x)√a(x) − 1`, computed without cancellation.
    fn w_factor(&self, x: f64) -> f64 {
        let p = self.power();
        let a = &self.problem.a;
        let ax = a(x);
        let r = gauss_kronrod(
            |v| {
                let av = a(x * v.powf(p));
                let ratio = (ax / av).sqrt();
                (ax - av) / (av * (ratio + 1.0))
            },
            0.0,
            1.0,
            // w is added to O(1) terms, so roundoff-level absolute accuracy suffices
            &QuadPolicy {
                abs_tol: 4.0 * f64::EPSILON,
                max_subdivisions: 50,
                ..self.policy
            },
        );
        r.value
    }

    /// `φ(x) = ¼ (∫₀ˣ s^{-α/2} a(s)^{-1/2} ds)²`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return if x == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!("phi needs x > 0, got {x}")))
            };
        }
        let alpha = self.problem.alpha;
        let r = self.r_factor(x)?;
        Ok(x.powf(2.0 - alpha) * r * r / ((2.0 - alpha) * (2.0 - alpha)))
    }

    /// `φ′(x) = √φ(x) / (x^{α/2} √a(x))`.
    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        let alpha = self.problem.alpha;
        let r = self.r_factor(x)?;
        Ok(x.powf(1.0 - alpha) * r / ((2.0 - alpha) * self.problem.a(x).sqrt()))
    }

    /// Inverse of φ on `(0, J]`.
    pub fn psi(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return if z == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!("psi needs z > 0, got {z}")))
            };
        }
        if z > self.j * (1.0 + 1e-13) {
            return Err(Error::Domain(format!("psi argument {z} exceeds J = {}", self.j)));
        }
        let alpha = self.problem.alpha;
        let target = z.ln();
        let (mut lo, mut hi) = (0.0f64, self.problem.interval);
        let mut x = ((2.0 - alpha).powi(2) * z).powf(1.0 / (2.0 - alpha)).min(hi);
        for _ in 0..200 {
            let r = self.r_factor(x)?;
            let f = x.powf(2.0 - alpha) * r * r / (2.0 - alpha).powi(2);
            let g = f.ln() - target;
            if (f - z).abs() <= 1e-13 * z.max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            // Newton in log variables: d ln φ / d ln x = (2-α) / (R √a)
            let slope = (2.0 - alpha) / (r * self.problem.a(x).sqrt());
            let mut next = x * (-g / slope).exp();
            if !(next > lo && next < hi) {
                next = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::Numerical(format!("psi({z}) did not converge")))
    }

    fn floor(&self, x: f64) -> (f64, bool) {
        if x < self.x_min {
            (self.x_min, true)
        } else {
            (x, false)
        }
    }

    /// Shared pieces `(R, w, √a)` at `x`.
    fn pieces(&self, x: f64) -> (f64, f64, f64) {
        let w = self.w_factor(x);
        let sa = self.problem.a(x).sqrt();
        (w, (1.0 + w) / sa, sa)
    }

    /// θ evaluated from its pieces; `x` must be at or above the floor.
    fn theta_raw(&self, x: f64) -> f64 {
        let p = &self.problem;
        let alpha = p.alpha;
        let (w, r, sa) = self.pieces(x);
        let a1 = p.a1(x);
        let b = p.b(x);
        let core = (-alpha * w - x * a1 * r / sa) / (2.0 * (2.0 - alpha));
        let drift = if alpha == 1.0 {
            // b R/√a − b(0) = (b − b0) R/√a + b0 (R/√a − 1)
            let b0 = p.b0();
            let a = sa * sa;
            (b - b0) * r / sa + b0 * (1.0 + w - a) / a
        } else {
            b * x.powf(1.0 - alpha) * r / ((2.0 - alpha) * sa)
        };
        core + drift
    }

    /// θ(x) with the evaluation floor applied.
    pub fn theta(&self, x: f64) -> Floored {
        let (x, floored) = self.floor(x);
        Floored {
            value: self.theta_raw(x),
            floored,
        }
    }

    /// `θ′(x)/φ′(x)`.
    fn theta_slope(&self, x: f64) -> f64 {
        let p = &self.problem;
        let alpha = p.alpha;
        let (w, _, sa) = self.pieces(x);
        let a = sa * sa;
        let (a1, a2, b, b1) = (p.a1(x), p.a2(x), p.b(x), p.b1(x));
        let eps = -(2.0 - alpha) * w / (2.0 * (1.0 + w));
        let drift = b1 + b * ((eps + 1.0 - alpha) / x - a1 / (2.0 * a));
        let bracket = -(2.0 + alpha) * x * a1 / 4.0 - x * x * a2 / 2.0 + x * x * a1 * a1 / (4.0 * a)
            - (alpha * a + x * a1) * eps / 2.0;
        drift + x.powf(alpha - 2.0) * bracket
    }

    /// `V(φ(x)) = −θ²/(4φ) − θ′/(2φ′) + (1−ν) θ / (2φ)`.
    pub fn v_of_phi(&self, x: f64) -> Floored {
        let (x, floored) = self.floor(x);
        let nu = compute_nu(&self.problem);
        let alpha = self.problem.alpha;
        let (w, _, sa) = self.pieces(x);
        let r = (1.0 + w) / sa;
        let phi = x.powf(2.0 - alpha) * r * r / (2.0 - alpha).powi(2);
        let th = self.theta_raw(x);
        let value = -th * th / (4.0 * phi) - self.theta_slope(x) / 2.0 + (1.0 - nu) * th / (2.0 * phi);
        Floored { value, floored }
    }

    /// `Θ(φ(x))` in the normalisation with `Θ ≡ √½` for `α = 1, a ≡ 1, b ≡ 0`.
    pub fn theta_big_of_phi(&self, x: f64) -> Result<f64> {
        let p = &self.problem;
        let alpha = p.alpha;
        let r = self.r_factor(x)?;
        let a4 = p.a(x).powf(0.25);
        let e = self.drift_exponent(x)?;
        Ok(if alpha == 1.0 {
            (2.0 * r).powf(p.b0() - 0.5) * a4 * (-0.5 * e).exp()
        } else {
            (2.0 * r / (2.0 - alpha)).powf(-alpha / (2.0 * (2.0 - alpha))) * a4 * (-0.5 * e).exp()
        })
    }

    /// `∫₀ˣ b/(w^α a) dw`, or `∫₀ˣ (b/a − b(0))/w dw` when `α = 1`.
    pub fn drift_exponent(&self, x: f64) -> Result<f64> {
        if self.problem.drift_free || x <= 0.0 {
            return Ok(0.0);
        }
        let p = &self.problem;
        let alpha = p.alpha;
        let b0 = p.b0();
        // the b(0) part of the integrand is integrated in closed form
        let (r, closed) = if alpha == 1.0 {
            (tanh_sinh(|s| (p.b(s) / p.a(s) - b0) / s, 0.0, x, &self.policy), 0.0)
        } else {
            (
                tanh_sinh(|s| (p.b(s) / p.a(s) - b0) / s.powf(alpha), 0.0, x, &self.policy),
                b0 * x.powf(1.0 - alpha) / (1.0 - alpha),
            )
        };
        let total = r.value + closed;
        if !r.converged && r.abs_error > 1e-8 * total.abs().max(1e-300) {
            return Err(Error::Numerical(format!("drift exponent quadrature at x = {x:e} failed")));
        }
        Ok(total)
    }

    /// Scale function `S(x) = 2^{2ν-1} ∫₀ˣ u^{-b(0)·1[α=1]} exp(−Λ(u)) du`.
    pub fn scale_s(&self, x: f64) -> Result<f64> {
        let nu = compute_nu(&self.problem);
        let c = 2f64.powf(2.0 * nu - 1.0);
        if x <= 0.0 {
            return Ok(0.0);
        }
        if self.problem.drift_free {
            return Ok(c * x);
        }
        let alpha = self.problem.alpha;
        let b0 = self.problem.b0();
        let mut failed = None;
        let r = tanh_sinh(
            |u| {
                let e = match self.drift_exponent(u) {
                    Ok(e) => e,
                    Err(err) => {
                        failed = Some(err);
                        0.0
                    }
                };
                let w = if alpha == 1.0 { u.powf(-b0) } else { 1.0 };
                w * (-e).exp()
            },
            0.0,
            x,
            &self.policy,
        );
        if let Some(err) = failed {
            return Err(err);
        }
        if !r.converged {
            return Err(Error::Numerical(format!("scale function quadrature at x = {x:e} failed")));
        }
        Ok(c * r.value)
    }

    pub fn snapshot(&self) -> BundleSnapshot {
        BundleSnapshot {
            alpha: self.problem.alpha,
            interval: self.problem.interval,
            nu: self.nu,
            j: self.j,
            theta_i: self.theta_i,
            v_i: self.v_i,
            v_i_kind: self.v_i_kind,
            frak_b: self.frak_b,
            frak_c: self.frak_c,
            t_i: self.t_i,
            bounds: self.bounds,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn snapshot_json(&self) -> String {
        serde_json::to_string_pretty(&self.snapshot()).expect("snapshot serializes")
    }
}
