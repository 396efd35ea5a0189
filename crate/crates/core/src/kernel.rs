//! Approximations `p^approx` and `p^{k-approx}` of the fundamental solution,
//! each paired with an explicit error budget.

use rayon::prelude::*;
use serde::Serialize;

use crate::coeffs::local_bounds;
use crate::duhamel::Perturbation;
use crate::error::{Error, Result};
use crate::modelkernel::{eval_q, ratio_bound};
use crate::quad::{gauss_kronrod_breaks, QuadPolicy};
use crate::transform::{compute_nu, theta_constant, TransformBundle};

/// Default perturbation order.
pub const DEFAULT_K: usize = 2;

/// Tolerance of the Duhamel terms, relative to their envelope.
pub const TERM_REL_TOL: f64 = 1e-6;

/// Bound that produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetVariant {
    /// Distance to the localized kernel `p_I`.
    Local,
    /// Global bound through the scale-function gap `S(I) − S(G)`.
    Scale,
    /// Global bound through the escape probability `𝔭_G`.
    Escape,
    /// Global bound needing `t < t′_G`, free of `𝔭_G`.
    Confined,
    /// Monte Carlo estimate, no analytic certificate.
    Mc,
}

impl BudgetVariant {
    pub fn name(&self) -> &'static str {
        match self {
            BudgetVariant::Local => "local",
            BudgetVariant::Scale => "scale",
            BudgetVariant::Escape => "escape",
            BudgetVariant::Confined => "confined",
            BudgetVariant::Mc => "mc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "local" => BudgetVariant::Local,
            "scale" => BudgetVariant::Scale,
            "escape" => BudgetVariant::Escape,
            "confined" => BudgetVariant::Confined,
            _ => return Err(Error::Config(format!("unknown budget variant '{s}'"))),
        })
    }
}

/// Validity region `(0, x_max)² × (0, t_max)` of a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Region {
    pub x_max: f64,
    pub t_max: f64,
}

/// An approximation of `p(x,y,t)` (or `p_I`) with its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub value: f64,
    /// Absolute bound on the distance to the target kernel.
    pub certificate: f64,
    /// `certificate / p^approx`.
    pub relative_certificate: f64,
    pub order_k: usize,
    pub region: Region,
    pub provenance: BudgetVariant,
}

/// Data attached to an inner level `0 < G < I`.
#[derive(Clone, Debug, Serialize)]
pub struct Localization {
    pub g: f64,
    pub interval: f64,
    pub phi_g: f64,
    pub theta_g: f64,
    /// `t_G = 4φ(G) / (9(2−ν))`.
    pub t_g: f64,
    /// `ψ(φ(G)/9)`.
    pub x_cut: f64,
    pub s_g: f64,
    pub s_i: f64,
    /// `S(G)/S(I)`, an upper bound for the escape probability `𝔭_G`.
    pub escape: f64,
}

/// A problem ready for kernel evaluation.
#[derive(Clone, Debug)]
pub struct KernelModel {
    pub bundle: TransformBundle,
    pub perturbation: Perturbation,
    /// Relative tolerance of the Duhamel terms.
    pub term_tol: f64,
}

impl KernelModel {
    pub fn new(bundle: TransformBundle) -> Result<Self> {
        let perturbation = Perturbation::from_bundle(&bundle)?;
        Ok(Self {
            bundle,
            perturbation,
            term_tol: TERM_REL_TOL,
        })
    }

    fn check_open(&self, x: f64, y: f64, t: f64) -> Result<()> {
        let i = self.bundle.interval();
        for (name, v) in [("x", x), ("y", y)] {
            if !(v > 0.0 && v < i) {
                return Err(Error::Domain(format!("{name} = {v} must lie in (0, I) with I = {i}")));
            }
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("t = {t} must be positive")));
        }
        Ok(())
    }

    /// `Θ(φ(x))/Θ(φ(y)) φ′(y)`.
    pub fn transformation_factor(&self, x: f64, y: f64) -> Result<f64> {
        let b = &self.bundle;
        Ok(b.theta_big_of_phi(x)? / b.theta_big_of_phi(y)? * b.phi_prime(y)?)
    }

    /// `p^approx(x,y,t) = q(φ(x), φ(y), t) Θ(φ(x))/Θ(φ(y)) φ′(y)`.
    pub fn p_approx(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.check_open(x, y, t)?;
        let b = &self.bundle;
        let q = eval_q(b.nu, b.phi(x)?, b.phi(y)?, t)?.value;
        Ok(q * self.transformation_factor(x, y)?)
    }

    /// Left minus right side of the weighted symmetry
    /// `φ(y)^{1−ν} Θ²(φ(y))/φ′(y) p(x,y,t) = (x ↔ y)`, relative to the
    /// larger side. The weights use ν computed from the problem.
    pub fn symmetry_residual(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let b = &self.bundle;
        let nu = compute_nu(&b.problem);
        let weight = |u: f64| -> Result<f64> {
            let th = b.theta_big_of_phi(u)?;
            Ok(b.phi(u)?.powf(1.0 - nu) * th * th / b.phi_prime(u)?)
        };
        let lhs = weight(y)? * self.p_approx(x, y, t)?;
        let rhs = weight(x)? * self.p_approx(y, x, t)?;
        let scale = lhs.abs().max(rhs.abs());
        Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale })
    }

    /// `ψ(J/9)`, the edge of the region certified for `p_I`.
    pub fn local_cut(&self) -> Result<f64> {
        self.bundle.psi(self.bundle.j / 9.0)
    }

    /// `Σ_{n<k} q_n` at transformed coordinates, with `p^approx`'s
    /// `q` and the ratio-space quadrature error.
    fn duhamel_sum(&self, k: usize, x: f64, y: f64, t: f64) -> Result<(f64, f64, f64, f64)> {
        let b = &self.bundle;
        let (z, w) = (b.phi(x)?, b.phi(y)?);
        let s = self.perturbation.k_order_sum(k, z, w, t, self.term_tol)?;
        let q = eval_q(b.nu, z, w, t)?.value;
        let quad: f64 = s.terms.iter().map(|term| term.quad_error).sum();
        let factor = self.transformation_factor(x, y)?;
        Ok((s.value, q, quad, factor))
    }

    /// `p^{k-approx}` certified against the localized kernel `p_I`.
    pub fn p_k_approx(&self, k: usize, x: f64, y: f64, t: f64) -> Result<KernelValue> {
        let b = &self.bundle;
        let region = Region {
            x_max: self.local_cut()?,
            t_max: b.t_i,
        };
        check_region(x, y, t, &region, "psi(phi(I)/9)", "t_I")?;
        let budget = self.local_budget(k, t)?;
        self.assemble(k, x, y, t, budget, region, BudgetVariant::Local)
    }

    /// `m_k M + D_k e^{−2φ(I)/(9t)}`.
    pub fn local_budget(&self, k: usize, t: f64) -> Result<f64> {
        let e = &self.perturbation.errors;
        let tail = ratio_bound(self.bundle.j, self.bundle.nu, t)?;
        Ok(e.m(k, t) * e.big_m(t) + e.d(k, t) * tail)
    }

    fn assemble(
        &self,
        k: usize,
        x: f64,
        y: f64,
        t: f64,
        budget: f64,
        region: Region,
        provenance: BudgetVariant,
    ) -> Result<KernelValue> {
        let (sum, q, quad, factor) = self.duhamel_sum(k, x, y, t)?;
        let approx = q * factor;
        let certificate = budget * approx + quad * factor;
        Ok(KernelValue {
            x,
            y,
            t,
            value: sum * factor,
            certificate,
            relative_certificate: if approx > 0.0 { certificate / approx } else { f64::INFINITY },
            order_k: k,
            region,
            provenance,
        })
    }

    /// Constants for the inner level `G`.
    pub fn localization(&self, g: f64) -> Result<Localization> {
        let b = &self.bundle;
        let i = b.interval();
        if !(g > 0.0 && g < i) {
            return Err(Error::Precondition(format!("need 0 < G < I, got G = {g}, I = {i}")));
        }
        let nu = compute_nu(&b.problem);
        let bounds_g = local_bounds(&b.problem.with_interval(g))?;
        let phi_g = b.phi(g)?;
        let s_g = b.scale_s(g)?;
        let s_i = b.scale_s(i)?;
        Ok(Localization {
            g,
            interval: i,
            phi_g,
            theta_g: theta_constant(b.alpha(), nu, &bounds_g),
            t_g: 4.0 * phi_g / (9.0 * (2.0 - b.nu)),
            x_cut: b.psi(phi_g / 9.0)?,
            s_g,
            s_i,
            escape: s_g / s_i,
        })
    }

    /// Time limit of a global variant at this localization.
    pub fn time_limit(&self, loc: &Localization, variant: BudgetVariant) -> f64 {
        match variant {
            BudgetVariant::Confined => loc.t_g.min(self.confined_limit(loc)),
            _ => loc.t_g,
        }
    }

    /// Largest `t` with `I − G − t b_I > 2√(t I^α a_I)`.
    fn confined_limit(&self, loc: &Localization) -> f64 {
        let bd = &self.bundle.bounds;
        let (i, g) = (loc.interval, loc.g);
        let c = i.powf(self.bundle.alpha()) * bd.a_i;
        // u = √t solves b_I u² + 2√c u − (I − G) = 0
        let d = i - g;
        let u = if bd.b_i > 0.0 {
            (-c.sqrt() + (c + bd.b_i * d).sqrt()) / bd.b_i
        } else {
            d / (2.0 * c.sqrt())
        };
        u * u
    }

    /// Sup bound on `|p − p^{k-approx}| / p^approx` over `(0, ψ(φ(G)/9))²`.
    pub fn global_budget(&self, loc: &Localization, k: usize, t: f64, variant: BudgetVariant) -> Result<f64> {
        if !(t > 0.0 && t < loc.t_g) {
            return Err(Error::Precondition(format!(
                "t = {t} must lie in (0, t_G) with t_G = 4 phi(G)/(9(2-nu)) = {}",
                loc.t_g
            )));
        }
        if variant == BudgetVariant::Confined {
            let tc = self.confined_limit(loc);
            if !(t < tc) {
                return Err(Error::Precondition(format!(
                    "t = {t} violates I - G - t b_I > 2 sqrt(t I^alpha a_I); t'_G = {tc}"
                )));
            }
        }
        let e = &self.perturbation.errors;
        let nu = compute_nu(&self.bundle.problem);
        let big_m = e.big_m(t);
        let decay = (-2.0 * loc.phi_g / (9.0 * t)).exp();
        let extra = match variant {
            BudgetVariant::Scale => {
                loc.theta_g.powi(4) * big_m * loc.phi_g.powf(1.0 - nu) / ((1.0 - nu) * (loc.s_i - loc.s_g))
            }
            BudgetVariant::Escape => loc.theta_g.powi(6) * big_m * loc.escape / (1.0 - loc.escape),
            BudgetVariant::Confined => loc.theta_g.powi(6) * big_m,
            BudgetVariant::Local | BudgetVariant::Mc => {
                return Err(Error::Config(format!("'{}' is not a global budget", variant.name())));
            }
        };
        Ok(e.m(k, t) * big_m + (e.d(k, t) + extra) * decay)
    }

    /// `p^{k-approx}` certified against the global kernel `p`.
    pub fn p_k_global(
        &self,
        loc: &Localization,
        k: usize,
        x: f64,
        y: f64,
        t: f64,
        variant: BudgetVariant,
    ) -> Result<KernelValue> {
        let region = Region {
            x_max: loc.x_cut,
            t_max: self.time_limit(loc, variant),
        };
        check_region(x, y, t, &region, "psi(phi(G)/9)", "t_G")?;
        let budget = self.global_budget(loc, k, t, variant)?;
        self.assemble(k, x, y, t, budget, region, variant)
    }

    /// The admissible `G` (query inside `(0, ψ(φ(G)/9))`, `t < t_G`) with
    /// the smallest budget, searched on a log grid below `I`.
    pub fn default_g(&self, x_max: f64, t_max: f64, k: usize, variant: BudgetVariant) -> Result<Localization> {
        let b = &self.bundle;
        let i = b.interval();
        let need = (9.0 * b.phi(x_max.min(i))?).max(9.0 * (2.0 - b.nu) * t_max / 4.0);
        if need >= b.j {
            return Err(Error::Region(format!(
                "no G < I certifies x <= {x_max}, t <= {t_max}: need phi(G) > {need}, phi(I) = {}",
                b.j
            )));
        }
        let g_lo = b.psi(need)?;
        let mut best: Option<(f64, Localization)> = None;
        const CANDIDATES: usize = 24;
        for n in 0..CANDIDATES {
            // skip the endpoints: G = g_lo has t = t_G, G = I has S(I) = S(G)
            let f = (n as f64 + 1.0) / (CANDIDATES as f64 + 1.0);
            let g = g_lo * (i / g_lo).powf(f);
            let loc = self.localization(g)?;
            if !(x_max < loc.x_cut) {
                continue;
            }
            let Ok(budget) = self.global_budget(&loc, k, t_max, variant) else {
                continue;
            };
            if best.as_ref().is_none_or(|(b0, _)| budget < *b0) {
                best = Some((budget, loc));
            }
        }
        best.map(|(_, loc)| loc).ok_or_else(|| {
            Error::Region(format!("no admissible G for x <= {x_max}, t <= {t_max} under I = {i}"))
        })
    }

    /// Evaluates the global approximation on a grid, in row-major
    /// `(x, y, t)` order regardless of the thread count.
    pub fn evaluate_grid(
        &self,
        loc: &Localization,
        k: usize,
        xs: &[f64],
        ys: &[f64],
        ts: &[f64],
        variant: BudgetVariant,
    ) -> Result<Vec<KernelValue>> {
        let points: Vec<(f64, f64, f64)> = xs
            .iter()
            .flat_map(|&x| ys.iter().flat_map(move |&y| ts.iter().map(move |&t| (x, y, t))))
            .collect();
        crate::parallel::install(None, || {
            points
                .par_iter()
                .map(|&(x, y, t)| self.p_k_global(loc, k, x, y, t, variant))
                .collect()
        })
    }

    /// `u_f(x,t) = ∫ f(y) p(x,y,t) dy` for `f` supported in `support`,
    /// approximated with `p^{k-approx}`; the certificate is
    /// `budget · ∫|f| p^approx dy` plus quadrature error.
    pub fn solve_cauchy<F: Fn(f64) -> f64>(
        &self,
        loc: &Localization,
        f: F,
        support: (f64, f64),
        x: f64,
        t: f64,
        k: usize,
        variant: BudgetVariant,
    ) -> Result<(f64, f64)> {
        let (lo, hi) = support;
        if !(lo >= 0.0 && hi > lo && hi < loc.x_cut) {
            return Err(Error::Region(format!(
                "support [{lo}, {hi}] must lie inside (0, psi(phi(G)/9)) = (0, {})",
                loc.x_cut
            )));
        }
        let budget = self.global_budget(loc, k, t, variant)?;
        let region = Region {
            x_max: loc.x_cut,
            t_max: self.time_limit(loc, variant),
        };
        check_region(x, x, t, &region, "psi(phi(G)/9)", "t_G")?;
        let mut failure = None;
        let mut term_rel: f64 = 0.0;
        let mut pts = vec![lo.max(f64::MIN_POSITIVE), hi];
        let spread = (2.0 * x * t).sqrt() + t;
        for c in [x - 3.0 * spread, x - spread, x, x + spread, x + 3.0 * spread] {
            if c > pts[0] && c < hi {
                pts.push(c);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let policy = QuadPolicy {
            rel_tol: 1e-7,
            abs_tol: 1e-14,
            max_subdivisions: 200,
        };
        let value = gauss_kronrod_breaks(
            |y| {
                let fy = f(y);
                if fy == 0.0 || failure.is_some() {
                    return 0.0;
                }
                match self.assemble(k, x, y, t, budget, region, variant) {
                    Ok(kv) => {
                        // share of the certificate due to Duhamel quadrature
                        term_rel = term_rel.max(kv.relative_certificate - budget);
                        fy * kv.value
                    }
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &pts,
            &policy,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let weight = gauss_kronrod_breaks(
            |y| {
                let fy = f(y).abs();
                if fy == 0.0 {
                    return 0.0;
                }
                self.p_approx(x, y, t).map(|p| fy * p).unwrap_or(0.0)
            },
            &pts,
            &policy,
        );
        let abs_mass = weight.value + weight.abs_error;
        let certificate = (budget + term_rel.max(0.0)) * abs_mass + value.abs_error;
        Ok((value.value, certificate))
    }
}

fn check_region(x: f64, y: f64, t: f64, region: &Region, x_name: &str, t_name: &str) -> Result<()> {
    for (name, v) in [("x", x), ("y", y)] {
        if !(v > 0.0 && v < region.x_max) {
            return Err(Error::Region(format!(
                "{name} = {v} outside the certified region (0, {x_name}) = (0, {})",
                region.x_max
            )));
        }
    }
    if !(t > 0.0 && t < region.t_max) {
        return Err(Error::Region(format!(
            "t = {t} outside the certified range (0, {t_name}) = (0, {})",
            region.t_max
        )));
    }
    Ok(())
}

/// `S(G)/S(I)`, the probability that the process started at `G` reaches
/// `I` before 0. Its limit as `I → ∞` is the escape probability.
pub fn escape_probability(bundle: &TransformBundle, g: f64, i: f64) -> Result<f64> {
    if !(g > 0.0 && g <= i) {
        return Err(Error::Precondition(format!("need 0 < G <= I, got G = {g}, I = {i}")));
    }
    if g == i {
        return Ok(1.0);
    }
    Ok((bundle.scale_s(g)? / bundle.scale_s(i)?).clamp(0.0, 1.0))
}
