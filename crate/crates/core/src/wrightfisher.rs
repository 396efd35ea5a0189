//! `∂t = x^α (1−x)^β ∂x²` on `(0,1)`, absorbed at both ends, approximated
//! from either boundary.
//!
//! Quantities anchored at 1 are those anchored at 0 for `(1−x; β, α)`.
//! The shared formulas below take the distance `u` to the anchoring
//! boundary and the pair `(p, q)` of near and far exponents.

use std::sync::Arc;

use serde::Serialize;

use crate::duhamel::{ErrorSequence, Perturbation, PotentialTable, POTENTIAL_TABLE_NODES};
use crate::error::{Error, Result};
use crate::modelkernel::{eval_q, NU_MAX};
use crate::quad::{tanh_sinh_nodes, Node, QuadPolicy};
use crate::special::{beta as beta_fn, ck_constant};

/// Boundary anchoring an approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Exponents `α, β ∈ (0,2)` of `x^α (1−x)^β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WfProblem {
    pub alpha: f64,
    pub beta: f64,
}

/// Closed-form constants for one side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WfConstants {
    pub side: Side,
    /// `G` for the left side, `H` for the right.
    pub level: f64,
    pub interval: f64,
    pub theta_i: f64,
    pub v_i: f64,
    pub nu: f64,
    pub frak_b: f64,
    pub m_ab: f64,
    pub t_side: f64,
    /// `φ(level)`.
    pub phi_level: f64,
    /// `φ(I)`.
    pub j: f64,
}

/// A certified value of `p(x,y,t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WfValue {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub value: f64,
    pub approx: f64,
    pub certificate: f64,
    pub relative_certificate: f64,
    pub k: usize,
    pub side: Side,
}

fn quad_policy() -> QuadPolicy {
    QuadPolicy::with_rel_tol(1e-13)
}

/// `(1−s)^{−e} − 1` without cancellation for small `s ≤ 1/2`.
fn excess(s: f64, e: f64) -> f64 {
    (-e * (-s).ln_1p()).exp_m1()
}

/// `∫ₗʰ r^{−e} dr` for `e < 1`.
fn power_integral(lo: f64, hi: f64, e: f64) -> f64 {
    (hi.powf(1.0 - e) - lo.powf(1.0 - e)) / (1.0 - e)
}

/// `∫ₗʰ r^{−e}[(1−r)^{−f} − 1] dr + ∫ₗʰ r^{−e} dr` for `0 ≤ l < h ≤ 1/2`.
/// The endpoint singularity at `r = 0` is integrated in closed form.
fn split_piece(lo: f64, hi: f64, e: f64, f: f64) -> Result<f64> {
    let r = tanh_sinh_nodes(
        |n: Node| {
            let r = lo + n.from_a;
            r.powf(-e) * excess(r, f)
        },
        lo,
        hi,
        &quad_policy(),
    );
    let total = r.value + power_integral(lo, hi, e);
    if !r.converged && r.abs_error > 1e-13 * total {
        return Err(Error::Numerical(format!("incomplete beta quadrature on [{lo}, {hi}] did not converge")));
    }
    Ok(total)
}

/// `∫₀ᵘ s^{−p/2} (1−s)^{−q/2} ds`, split at `1/2` so both endpoint
/// singularities are handled in closed form.
fn anchored_b(u: f64, p: f64, q: f64) -> Result<f64> {
    let m = u.min(0.5);
    let mut total = split_piece(0.0, m, p / 2.0, q / 2.0)?;
    if u > 0.5 {
        total += split_piece(1.0 - u, 0.5, q / 2.0, p / 2.0)?;
    }
    Ok(total)
}

fn anchored_theta(u: f64, b: f64, p: f64, q: f64) -> f64 {
    u.powf(p / 4.0) * (1.0 - u).powf(q / 4.0) / b.powf(p / (2.0 * (2.0 - p)))
}

fn anchored_v(u: f64, b: f64, p: f64, q: f64) -> f64 {
    let lead = -p * (p - 4.0) / (4.0 * (2.0 - p).powi(2) * b * b);
    let m = p - p * u - q * u;
    let bracket = m * m / 16.0 - (p * (1.0 - u).powi(2) + q * u * u) / 4.0;
    lead + u.powf(p - 2.0) * (1.0 - u).powf(q - 2.0) * bracket
}

fn check_unit(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} must lie in (0,1)")));
    }
    Ok(())
}

impl WfProblem {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v < 2.0) {
                return Err(Error::Domain(format!("{name} = {v} must lie in (0,2)")));
            }
        }
        Ok(Self { alpha, beta })
    }

    /// The problem seen from the other boundary: `(β, α)`.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// `(near, far)` exponents for a side.
    fn exponents(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (self.alpha, self.beta),
            Side::Right => (self.beta, self.alpha),
        }
    }

    /// `b^{(L)}(x) = ∫₀ˣ s^{−α/2}(1−s)^{−β/2} ds` or
    /// `b^{(R)}(x) = ∫ₓ¹ s^{−α/2}(1−s)^{−β/2} ds`, by quadrature.
    pub fn incomplete_beta_transform(&self, x: f64, side: Side) -> Result<f64> {
        check_unit(x)?;
        let (a, b) = (self.alpha, self.beta);
        match side {
            Side::Left => anchored_b(x, a, b),
            Side::Right => anchored_b(1.0 - x, b, a),
        }
    }

    /// The same integral through the regularized incomplete beta function.
    pub fn incomplete_beta_closed(&self, x: f64, side: Side) -> Result<f64> {
        check_unit(x)?;
        let (p, q) = self.exponents(side);
        let u = match side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        };
        let (a, b) = (1.0 - p / 2.0, 1.0 - q / 2.0);
        Ok(statrs::function::beta::beta_reg(a, b, u) * beta_fn(a, b))
    }

    /// `φ(x) = b(x)²/4` for the side.
    pub fn phi(&self, x: f64, side: Side) -> Result<f64> {
        let b = self.incomplete_beta_transform(x, side)?;
        Ok(0.25 * b * b)
    }

    /// `ν^{(L)} = (1−α)/(2−α)`, `ν^{(R)} = (1−β)/(2−β)`.
    pub fn nu(&self, side: Side) -> f64 {
        let (p, _) = self.exponents(side);
        (1.0 - p) / (2.0 - p)
    }

    /// `𝔟` for the side: `1/(2−p)` when the near exponent is below 1.
    pub fn frak_b(&self, side: Side) -> f64 {
        let (p, _) = self.exponents(side);
        if p >= 1.0 {
            1.0
        } else {
            1.0 - self.nu(side)
        }
    }

    /// `M_{α,β} = max x^α(1−x)^β = α^α β^β / (α+β)^{α+β}`.
    pub fn m_ab(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        a.powf(a) * b.powf(b) / (a + b).powf(a + b)
    }

    /// `Θ(φ(x))` in closed form.
    pub fn theta_of_phi(&self, x: f64, side: Side) -> Result<f64> {
        let b = self.incomplete_beta_transform(x, side)?;
        let (p, q) = self.exponents(side);
        let u = match side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        };
        Ok(anchored_theta(u, b, p, q))
    }

    /// `V(φ(x))` in closed form.
    pub fn v_of_phi(&self, x: f64, side: Side) -> Result<f64> {
        let b = self.incomplete_beta_transform(x, side)?;
        let (p, q) = self.exponents(side);
        let u = match side {
            Side::Left => x,
            Side::Right => 1.0 - x,
        };
        Ok(anchored_v(u, b, p, q))
    }

    /// `Θ_I` for the side.
    pub fn theta_i(&self, side: Side, interval: f64) -> f64 {
        match side {
            Side::Left => {
                let (a, b) = (self.alpha, self.beta);
                (2.0 / (2.0 - a)).powf(a / (2.0 * (2.0 - a))) * (1.0 - interval).powf(-b / (2.0 * (2.0 - a)))
            }
            Side::Right => {
                let (a, b) = (self.alpha, self.beta);
                (2.0 / (2.0 - b)).powf(b / (2.0 * (2.0 - b))) * interval.powf(-a / (2.0 * (2.0 - b)))
            }
        }
    }

    /// `V_I` for the side.
    pub fn v_i(&self, side: Side, interval: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        match side {
            Side::Left => b / 16.0 * (4.0 - b + 2.0 * a) * (1.0 - interval).powf(b / (2.0 - a) - 2.0),
            Side::Right => a / 16.0 * (4.0 - a + 2.0 * b) * interval.powf(a / (2.0 - b) - 2.0),
        }
    }

    fn check_levels(&self, side: Side, level: f64, interval: f64) -> Result<()> {
        let ok = match side {
            Side::Left => level > 0.0 && level < interval && interval < 1.0,
            Side::Right => interval > 0.0 && interval < level && level < 1.0,
        };
        if !ok {
            let want = match side {
                Side::Left => "0 < G < I < 1",
                Side::Right => "0 < I < H < 1",
            };
            return Err(Error::Precondition(format!(
                "{} side needs {want}, got level = {level}, I = {interval}",
                side.name()
            )));
        }
        Ok(())
    }

    /// All closed-form constants for a side, level (`G` or `H`) and `I`.
    pub fn constants(&self, side: Side, level: f64, interval: f64) -> Result<WfConstants> {
        self.check_levels(side, level, interval)?;
        let (p, _) = self.exponents(side);
        let m_ab = self.m_ab();
        let phi_level = self.phi(level, side)?;
        let gap = (level - interval).abs();
        let t_side = (4.0 * (2.0 - p) * phi_level / (9.0 * (3.0 - p))).min(gap * gap / (4.0 * m_ab));
        Ok(WfConstants {
            side,
            level,
            interval,
            theta_i: self.theta_i(side, interval),
            v_i: self.v_i(side, interval),
            nu: self.nu(side),
            frak_b: self.frak_b(side),
            m_ab,
            t_side,
            phi_level,
            j: self.phi(interval, side)?,
        })
    }

    /// `p^{(L)-approx}` or `p^{(R)-approx}` in closed form.
    pub fn p_approx(&self, x: f64, y: f64, t: f64, side: Side) -> Result<f64> {
        check_unit(x)?;
        check_unit(y)?;
        let (a, b) = (self.alpha, self.beta);
        let (p, _) = self.exponents(side);
        let bx = self.incomplete_beta_transform(x, side)?;
        let by = self.incomplete_beta_transform(y, side)?;
        let q = eval_q(self.nu(side), 0.25 * bx * bx, 0.25 * by * by, t)?.value;
        let factor = x.powf(a / 4.0) * (1.0 - x).powf(b / 4.0)
            / (2.0 * y.powf(3.0 * a / 4.0) * (1.0 - y).powf(3.0 * b / 4.0))
            * by.powf((4.0 - p) / (2.0 * (2.0 - p)))
            / bx.powf(p / (2.0 * (2.0 - p)));
        Ok(q * factor)
    }
}

/// A side-anchored approximation with its certified region.
#[derive(Clone)]
pub struct WfKernel {
    pub problem: WfProblem,
    pub constants: WfConstants,
    pub errors: ErrorSequence,
    perturbation: Perturbation,
    pub term_tol: f64,
}

impl WfKernel {
    pub fn new(problem: WfProblem, side: Side, level: f64, interval: f64) -> Result<Self> {
        let c = problem.constants(side, level, interval)?;
        if c.nu > NU_MAX {
            return Err(Error::Domain(format!("nu = {} above {NU_MAX}", c.nu)));
        }
        let errors = ErrorSequence::new(c.frak_b, ck_constant(), c.v_i);
        let (p, q) = problem.exponents(side);
        let reach = match side {
            Side::Left => interval,
            Side::Right => 1.0 - interval,
        };
        let lo = (1e-12 * reach).ln();
        let hi = reach.ln();
        let n = POTENTIAL_TABLE_NODES;
        let mut zs = Vec::with_capacity(n);
        let mut vs = Vec::with_capacity(n);
        for k in 0..n {
            let u = if k + 1 == n {
                reach
            } else {
                (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()
            };
            let b = anchored_b(u, p, q)?;
            zs.push(0.25 * b * b);
            vs.push(anchored_v(u, b, p, q));
        }
        let table = PotentialTable::from_samples(&zs, &vs, c.frak_b, c.j)?;
        let perturbation = Perturbation::from_parts(c.nu, c.j, errors, Arc::new(table));
        Ok(Self {
            problem,
            constants: c,
            errors,
            perturbation,
            term_tol: crate::kernel::TERM_REL_TOL,
        })
    }

    pub fn side(&self) -> Side {
        self.constants.side
    }

    /// Whether `(x, y, t)` lies in the certified region of this side.
    pub fn certifies(&self, x: f64, y: f64, t: f64) -> bool {
        self.check_region(x, y, t).is_ok()
    }

    pub fn check_region(&self, x: f64, y: f64, t: f64) -> Result<()> {
        let c = &self.constants;
        let side = c.side;
        for (name, v) in [("x", x), ("y", y)] {
            let inside = match side {
                Side::Left => v > 0.0 && v < c.level,
                Side::Right => v > c.level && v < 1.0,
            };
            if !inside || self.problem.phi(v, side)? > c.phi_level / 9.0 {
                return Err(Error::Region(format!(
                    "{name} = {v} outside the {} region phi(v) <= phi({})/9",
                    side.name(),
                    c.level
                )));
            }
        }
        if !(t > 0.0 && t < c.t_side) {
            return Err(Error::Region(format!(
                "t = {t} outside (0, t_{}) = (0, {})",
                side.name(),
                c.t_side
            )));
        }
        Ok(())
    }

    /// Bound on `|p − p^{k-approx}| / p^approx`:
    /// `Σ_{n≥k} m_n + [D_k + C M min(·,1)] e^{−2φ(level)/(9t)}`.
    pub fn budget(&self, k: usize, t: f64) -> Result<f64> {
        let c = &self.constants;
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if !(t > 0.0 && t < c.t_side) {
            return Err(Error::Precondition(format!("t = {t} must lie in (0, {})", c.t_side)));
        }
        let (a, b) = (self.problem.alpha, self.problem.beta);
        let big_m = self.errors.big_m(t);
        let spill = match c.side {
            Side::Left => {
                let g = c.level;
                (2.0 / (2.0 - a)).powf(a / (2.0 - a)) * (1.0 - g).powf(-2.0 * b / (2.0 - a)) * (g / (1.0 - g)).min(1.0)
            }
            Side::Right => {
                let h = c.level;
                (2.0 / (2.0 - b)).powf(b / (2.0 - b)) * h.powf(-2.0 * a / (2.0 - b)) * ((1.0 - h) / h).min(1.0)
            }
        };
        let decay = (-2.0 * c.phi_level / (9.0 * t)).exp();
        Ok(self.errors.tail(k, t) + (self.errors.d(k, t) + spill * big_m) * decay)
    }

    pub fn p_approx(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        self.problem.p_approx(x, y, t, self.side())
    }

    /// `p^{k-approx}` with its certificate.
    pub fn value(&self, k: usize, x: f64, y: f64, t: f64) -> Result<WfValue> {
        self.check_region(x, y, t)?;
        let side = self.side();
        let budget = self.budget(k, t)?;
        let approx = self.p_approx(x, y, t)?;
        let (z, w) = (self.problem.phi(x, side)?, self.problem.phi(y, side)?);
        let q = eval_q(self.constants.nu, z, w, t)?.value;
        let (value, quad) = if k == 1 {
            (approx, 0.0)
        } else {
            let s = self.perturbation.k_order_sum(k, z, w, t, self.term_tol)?;
            let quad: f64 = s.terms.iter().map(|term| term.quad_error).sum();
            (s.value / q * approx, quad / q * approx)
        };
        let certificate = budget * approx + quad;
        Ok(WfValue {
            x,
            y,
            t,
            value,
            approx,
            certificate,
            relative_certificate: certificate / approx,
            k,
            side,
        })
    }
}

/// Picks the side whose region contains the query; with both, the tighter
/// budget wins.
pub fn wf_auto(left: Option<&WfKernel>, right: Option<&WfKernel>, k: usize, x: f64, y: f64, t: f64) -> Result<WfValue> {
    let mut best: Option<WfValue> = None;
    let mut last_err = None;
    for kern in [left, right].into_iter().flatten() {
        match kern.value(k, x, y, t) {
            Ok(v) => {
                if best.is_none_or(|b| v.relative_certificate < b.relative_certificate) {
                    best = Some(v);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Config("no side configured".into())))
}

/// `|y^α(1−y)^β p̂(x,y,t) − x^α(1−x)^β p̂(y,x,t)|` relative to the mean of
/// the two sides.
pub fn wf_symmetry_residual(problem: &WfProblem, pxy: f64, pyx: f64, x: f64, y: f64) -> f64 {
    let w = |u: f64| u.powf(problem.alpha) * (1.0 - u).powf(problem.beta);
    let (l, r) = (w(y) * pxy, w(x) * pyx);
    let mean = 0.5 * (l.abs() + r.abs());
    if mean == 0.0 {
        0.0
    } else {
        (l - r).abs() / mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_case() {
        let wf = WfProblem::new(1.0, 1.0).unwrap();
        let b = wf.incomplete_beta_transform(0.5, Side::Left).unwrap();
        assert!((b - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        let closed = wf.incomplete_beta_closed(0.5, Side::Left).unwrap();
        assert!((closed - b).abs() < 1e-12);
    }

    #[test]
    fn constants_match_closed_forms() {
        let wf = WfProblem::new(1.0, 1.0).unwrap();
        assert_eq!(wf.m_ab(), 0.25);
        assert_eq!(wf.v_i(Side::Left, 0.5), 5.0 / 8.0);
        assert_eq!(wf.nu(Side::Left), 0.0);
        assert_eq!(wf.nu(Side::Right), 0.0);
    }

    #[test]
    fn mirror_identity() {
        let wf = WfProblem::new(0.7, 1.4).unwrap();
        let m = wf.mirrored();
        for &x in &[0.03, 0.2, 0.6, 0.95] {
            let r = wf.incomplete_beta_transform(x, Side::Right).unwrap();
            let l = m.incomplete_beta_transform(1.0 - x, Side::Left).unwrap();
            assert!((r - l).abs() < 1e-12 * l, "{x}");
        }
        let pr = wf.p_approx(0.97, 0.96, 0.001, Side::Right).unwrap();
        let pl = m.p_approx(0.03, 0.04, 0.001, Side::Left).unwrap();
        assert!((pr - pl).abs() < 1e-9 * pl, "{pr} vs {pl}");
    }

    #[test]
    fn budget_is_small_at_short_times() {
        let wf = WfProblem::new(1.0, 1.0).unwrap();
        let k = WfKernel::new(wf, Side::Left, 0.3, 0.5).unwrap();
        let b = k.budget(1, 0.005).unwrap();
        assert!(b.is_finite() && b < 0.5, "{b}");
    }

    #[test]
    fn closed_forms_match_general_bundle() {
        use crate::coeffs::Problem;
        use crate::transform::TransformBundle;
        for &(a, b) in &[(1.0, 1.0), (0.6, 1.3), (1.5, 0.8)] {
            let wf = WfProblem::new(a, b).unwrap();
            let bundle = TransformBundle::new(Problem::wright_fisher(a, b, 0.5)).unwrap();
            for &x in &[0.01, 0.1, 0.3] {
                let phi = wf.phi(x, Side::Left).unwrap();
                let pb = bundle.phi(x).unwrap();
                assert!((phi - pb).abs() < 1e-9 * pb, "phi {a} {b} {x}: {phi} vs {pb}");
                let th = wf.theta_of_phi(x, Side::Left).unwrap();
                let tb = bundle.theta_big_of_phi(x).unwrap();
                assert!((th - tb).abs() < 1e-7 * tb, "theta {a} {b} {x}: {th} vs {tb}");
                let v = wf.v_of_phi(x, Side::Left).unwrap();
                let vb = bundle.v_of_phi(x).value;
                assert!((v - vb).abs() < 1e-6 * (1.0 + v.abs()), "V {a} {b} {x}: {v} vs {vb}");
            }
        }
    }

    #[test]
    fn phi_sandwich() {
        let wf = WfProblem::new(0.8, 1.2).unwrap();
        for i in 1..1024 {
            let x = i as f64 / 1024.0;
            let l = wf.incomplete_beta_transform(x, Side::Left).unwrap();
            let c = wf.incomplete_beta_closed(x, Side::Left).unwrap();
            assert!((l - c).abs() < 1e-10 * c.max(1.0), "{x}");
            let phi = 0.25 * l * l;
            let lo = x.powf(2.0 - 0.8) / (2.0f64 - 0.8).powi(2);
            assert!(phi >= lo * (1.0 - 1e-12), "{x}");
        }
    }

    #[test]
    fn second_order_value_is_certified() {
        let wf = WfProblem::new(1.0, 1.0).unwrap();
        let k = WfKernel::new(wf, Side::Left, 0.3, 0.5).unwrap();
        let v1 = k.value(1, 0.02, 0.03, 0.002).unwrap();
        let v2 = k.value(2, 0.02, 0.03, 0.002).unwrap();
        assert!(v2.relative_certificate < v1.relative_certificate);
        assert!((v2.value - v1.value).abs() <= v1.certificate);
        let back = k.value(2, 0.03, 0.02, 0.002).unwrap();
        let r = wf_symmetry_residual(&wf, v2.value, back.value, 0.02, 0.03);
        assert!(r < v2.relative_certificate + back.relative_certificate, "{r}");
    }

    #[test]
    fn symmetry_residual_vanishes_on_diagonal() {
        let wf = WfProblem::new(1.0, 1.0).unwrap();
        assert_eq!(wf_symmetry_residual(&wf, 2.0, 2.0, 0.1, 0.1), 0.0);
    }
}
