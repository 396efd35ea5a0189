//! Perturbation series for the kernel of `L₀ + V` built on the model kernel
//! `q`, with the explicit error sequences `m_n`, `M` and `D_k`.
//!
//! Terms are computed as ratios `q_n / q`, which stay bounded by `m_n(t)`,
//! so nothing underflows in the tails. Order `n ≥ 2` integrates
//! `q(z,ξ,t−s) V(ξ) q(ξ,w,s) ρ_{n−1}(ξ)` where `ρ_{n−1} = q_{n−1}/q` is
//! sampled on Chebyshev nodes across the bridge between `z` and `w`.

use std::sync::Arc;

use serde::Serialize;

use crate::coeffs::log_grid;
use crate::error::{Error, Result};
use crate::modelkernel::{eval_q, integrate_half_line_weighted, ln_q, ratio_bound, NU_MAX};
use crate::quad::{gauss_kronrod, QuadPolicy, QuadResult};
use crate::special::{beta, ln_gamma};
use crate::transform::TransformBundle;

/// Highest order computed without [`Perturbation::allow_high_orders`].
pub const DEFAULT_MAX_ORDER: usize = 3;

/// Number of nodes in the tabulated potential.
pub const POTENTIAL_TABLE_NODES: usize = 2048;

const CHEB_NODES: usize = 10;
const BRIDGE_OFFSETS: [f64; 5] = [0.5, 1.5, 3.0, 6.0, 12.0];
const BRIDGE_REACH: f64 = 9.0;

/// A potential `V(z)` on `(0, ∞)`.
pub trait Potential: Send + Sync {
    fn value(&self, z: f64) -> f64;

    /// Points where `V` is not smooth (jumps, the end of its support).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn value(&self, _: f64) -> f64 {
        0.0
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `V ≡ value` on `(0, support)`, zero beyond.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPotential {
    pub value: f64,
    pub support: f64,
}

impl ConstantPotential {
    pub fn everywhere(value: f64) -> Self {
        Self {
            value,
            support: f64::INFINITY,
        }
    }
}

impl Potential for ConstantPotential {
    fn value(&self, z: f64) -> f64 {
        if z < self.support {
            self.value
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.support.is_finite() {
            vec![self.support]
        } else {
            Vec::new()
        }
    }

    fn is_zero(&self) -> bool {
        self.value == 0.0
    }
}

/// `V(z) = V(φ(x))` tabulated on `z_k = φ(x_k)` for log-spaced `x_k`.
///
/// The table stores `u = z^{1−𝔟} V`, which is bounded, and interpolates it
/// with cubic Hermite segments in `ln z`. Below the first node `u` is
/// held constant; above `J` the potential is zero.
#[derive(Clone, Debug)]
pub struct PotentialTable {
    ln_z: Vec<f64>,
    u: Vec<f64>,
    slope: Vec<f64>,
    frak_b: f64,
    j: f64,
    zero: bool,
}

impl PotentialTable {
    pub fn from_bundle(bundle: &TransformBundle) -> Result<Self> {
        let xs = log_grid(bundle.interval(), POTENTIAL_TABLE_NODES);
        let mut zs = Vec::with_capacity(xs.len());
        let mut vs = Vec::with_capacity(xs.len());
        for &x in &xs {
            zs.push(bundle.phi(x)?);
            vs.push(bundle.v_of_phi(x).value);
        }
        Self::from_samples(&zs, &vs, bundle.frak_b, bundle.j)
    }

    /// Builds the table from samples `V(z_k)` at increasing `z_k`; the
    /// potential vanishes from `j` on.
    pub fn from_samples(zs: &[f64], vs: &[f64], frak_b: f64, j: f64) -> Result<Self> {
        if zs.len() < 3 || zs.len() != vs.len() {
            return Err(Error::Numerical("potential table needs at least 3 matching samples".into()));
        }
        let mut ln_z = Vec::with_capacity(zs.len());
        let mut u = Vec::with_capacity(zs.len());
        for (&z, &v) in zs.iter().zip(vs) {
            if !v.is_finite() || !(z > 0.0) {
                return Err(Error::Numerical(format!("potential sample V({z:e}) = {v} is not usable")));
            }
            ln_z.push(z.ln());
            u.push(v * z.powf(1.0 - frak_b));
        }
        for k in 1..ln_z.len() {
            if ln_z[k] <= ln_z[k - 1] {
                return Err(Error::Numerical("potential nodes must be increasing".into()));
            }
        }
        let slope = hermite_slopes(&ln_z, &u);
        let zero = u.iter().all(|&v| v == 0.0);
        Ok(Self {
            ln_z,
            u,
            slope,
            frak_b,
            j,
            zero,
        })
    }

    fn u_at(&self, lz: f64) -> f64 {
        let n = self.ln_z.len();
        if lz <= self.ln_z[0] {
            return self.u[0];
        }
        if lz >= self.ln_z[n - 1] {
            return self.u[n - 1];
        }
        let k = self.ln_z.partition_point(|&p| p <= lz) - 1;
        let h = self.ln_z[k + 1] - self.ln_z[k];
        let s = (lz - self.ln_z[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.u[k]
            + (s3 - 2.0 * s2 + s) * h * self.slope[k]
            + (-2.0 * s3 + 3.0 * s2) * self.u[k + 1]
            + (s3 - s2) * h * self.slope[k + 1]
    }
}

impl Potential for PotentialTable {
    fn value(&self, z: f64) -> f64 {
        if !(z > 0.0) || z >= self.j {
            return 0.0;
        }
        let lz = z.ln();
        let u = self.u_at(lz);
        if self.frak_b == 1.0 {
            u
        } else {
            u * ((self.frak_b - 1.0) * lz).exp()
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.j]
    }

    fn is_zero(&self) -> bool {
        self.zero
    }
}

/// Three-point derivative estimates on a non-uniform grid.
fn hermite_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    for k in 1..n - 1 {
        let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
        let (s0, s1) = ((y[k] - y[k - 1]) / h0, (y[k + 1] - y[k]) / h1);
        d[k] = (h1 * s0 + h0 * s1) / (h0 + h1);
    }
    let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
    d[0] = ((2.0 * h0 + h1) * (y[1] - y[0]) / h0 - h0 * (y[2] - y[1]) / h1) / (h0 + h1);
    let (h0, h1) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    d[n - 1] = ((2.0 * h1 + h0) * (y[n - 1] - y[n - 2]) / h1 - h1 * (y[n - 2] - y[n - 3]) / h0) / (h0 + h1);
    d
}

/// Which convention `m_n` follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MConvention {
    /// `𝔟 < 1`: `m_n = Γ(𝔟)^{n+1} (𝔠 t^𝔟 V_I)^n / Γ((n+1)𝔟)`.
    WithCk,
    /// `𝔟 = 1`: `m_n = (t V_I)^n / n!`, so `M(t) = e^{t V_I}`.
    BoundedPotential,
}

/// The error sequences `m_n(t)`, `M(t)` and `D_k(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorSequence {
    pub frak_b: f64,
    pub frak_c: f64,
    pub v_i: f64,
    pub convention: MConvention,
}

impl ErrorSequence {
    pub fn new(frak_b: f64, frak_c: f64, v_i: f64) -> Self {
        let convention = if frak_b == 1.0 {
            MConvention::BoundedPotential
        } else {
            MConvention::WithCk
        };
        Self {
            frak_b,
            frak_c,
            v_i,
            convention,
        }
    }

    pub fn from_bundle(bundle: &TransformBundle) -> Self {
        Self::new(bundle.frak_b, bundle.frak_c, bundle.v_i)
    }

    fn m_constant(&self) -> f64 {
        match self.convention {
            MConvention::WithCk => self.frak_c,
            MConvention::BoundedPotential => 1.0,
        }
    }

    fn ln_m(&self, n: usize, t: f64) -> f64 {
        let b = self.frak_b;
        let nf = n as f64;
        let base = self.m_constant() * t.powf(b) * self.v_i;
        (nf + 1.0) * ln_gamma(b) + nf * base.ln() - ln_gamma((nf + 1.0) * b)
    }

    /// `m_n(t)`.
    pub fn m(&self, n: usize, t: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if self.v_i == 0.0 {
            return 0.0;
        }
        self.ln_m(n, t).exp()
    }

    /// `M(t) = Σ m_n(t)`, summed until a term drops below `1e-18` of the
    /// partial sum past the largest term.
    pub fn big_m(&self, t: f64) -> f64 {
        if self.v_i == 0.0 {
            return 1.0;
        }
        let mut sum = 1.0;
        let mut prev = 1.0;
        for n in 1..1_000_000 {
            let term = self.m(n, t);
            sum += term;
            if term < prev && term < 1e-18 * sum {
                break;
            }
            prev = term;
        }
        sum
    }

    /// `Σ_{n≥k} m_n(t)`, summed directly so that `M − Σ_{n<k} m_n` keeps
    /// its precision.
    pub fn tail(&self, k: usize, t: f64) -> f64 {
        if k == 0 {
            return self.big_m(t);
        }
        if self.v_i == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for n in k..k + 1_000_000 {
            let term = self.m(n, t);
            sum += term;
            if term < prev && term <= 1e-18 * sum {
                break;
            }
            prev = term;
        }
        sum
    }

    /// `D_k(t) = Σ_{n<k} (2𝔠 t^𝔟 B(𝔟,𝔟) V_I)^n`.
    pub fn d(&self, k: usize, t: f64) -> f64 {
        let r = 2.0 * self.frak_c * t.powf(self.frak_b) * beta(self.frak_b, self.frak_b) * self.v_i;
        (0..k).map(|n| r.powi(n as i32)).sum()
    }

    /// Largest `t` with `𝔠 t^𝔟 V_I B(𝔟,𝔟) ≤ 1`; below it `m_k M` does not
    /// grow with `k`.
    pub fn t_star(&self) -> f64 {
        if self.v_i == 0.0 {
            return f64::INFINITY;
        }
        (1.0 / (self.frak_c * self.v_i * beta(self.frak_b, self.frak_b))).powf(1.0 / self.frak_b)
    }
}

/// One term `q_n(z, w, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DuhamelTerm {
    pub n: usize,
    pub value: f64,
    pub quad_error: f64,
    /// `m_n(t) q(z,w,t)`.
    pub envelope: f64,
    /// False when the quadrature error exceeds 10% of the envelope.
    pub converged: bool,
}

impl DuhamelTerm {
    pub fn within_envelope(&self) -> bool {
        self.value.abs() <= self.envelope + self.quad_error
    }
}

/// Output of [`Perturbation::k_order_sum`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KOrderSum {
    pub value: f64,
    pub certificate: f64,
    pub terms: Vec<DuhamelTerm>,
    pub convention: MConvention,
}

/// Everything needed to expand the kernel of `L₀ + V` to finite order.
#[derive(Clone)]
pub struct Perturbation {
    pub nu: f64,
    pub j: f64,
    pub t_i: f64,
    pub errors: ErrorSequence,
    potential: Arc<dyn Potential>,
    max_order: usize,
}

impl std::fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Perturbation")
            .field("nu", &self.nu)
            .field("j", &self.j)
            .field("t_i", &self.t_i)
            .field("errors", &self.errors)
            .field("max_order", &self.max_order)
            .finish()
    }
}

/// Scratch values for one evaluation of a time slice.
struct Slice {
    centre: f64,
    spread: f64,
    y_lo: f64,
    y_hi: f64,
}

fn bridge(z: f64, w: f64, t: f64, s: f64) -> Slice {
    let (tau1, tau2) = (t - s, s);
    let yc = (z.sqrt() * tau2 + w.sqrt() * tau1) / t;
    let sy = (tau1 * tau2 / (2.0 * t)).sqrt();
    Slice {
        centre: yc * yc,
        spread: 2.0 * yc * sy + sy * sy + tau1 * tau2 / t,
        y_lo: (yc - BRIDGE_REACH * sy).max(0.0),
        y_hi: yc + BRIDGE_REACH * sy,
    }
}

/// Chebyshev interpolant on `[lo, hi]`.
struct Chebyshev {
    lo: f64,
    hi: f64,
    coef: Vec<f64>,
}

impl Chebyshev {
    fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let c = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * c
            })
            .collect()
    }

    fn fit(lo: f64, hi: f64, values: &[f64]) -> Self {
        let n = values.len();
        let coef = (0..n)
            .map(|j| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                if j == 0 {
                    s / n as f64
                } else {
                    2.0 * s / n as f64
                }
            })
            .collect();
        Self { lo, hi, coef }
    }

    fn eval(&self, x: f64) -> f64 {
        let u = ((2.0 * x - self.lo - self.hi) / (self.hi - self.lo)).clamp(-1.0, 1.0);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coef.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.coef[0]
    }

    /// Size of the two highest coefficients, used as the interpolation error.
    fn tail(&self) -> f64 {
        let n = self.coef.len();
        self.coef[n - 1].abs() + self.coef[n - 2].abs()
    }
}

impl Perturbation {
    /// Uses the bundle's potential, tabulated once.
    pub fn from_bundle(bundle: &TransformBundle) -> Result<Self> {
        let table = PotentialTable::from_bundle(bundle)?;
        Ok(Self::with_potential(bundle, Arc::new(table), bundle.v_i))
    }

    /// Uses a caller-supplied potential with bound `|V(z)| ≤ v_i z^{𝔟−1}`.
    pub fn with_potential(bundle: &TransformBundle, potential: Arc<dyn Potential>, v_i: f64) -> Self {
        Self {
            nu: bundle.nu,
            j: bundle.j,
            t_i: bundle.t_i,
            errors: ErrorSequence::new(bundle.frak_b, bundle.frak_c, v_i),
            potential,
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    /// Model-only constructor for tests that do not need a bundle.
    pub fn from_parts(nu: f64, j: f64, errors: ErrorSequence, potential: Arc<dyn Potential>) -> Self {
        Self {
            nu,
            j,
            t_i: 4.0 * j / (9.0 * (2.0 - nu)),
            errors,
            potential,
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn allow_high_orders(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn potential(&self) -> &dyn Potential {
        self.potential.as_ref()
    }

    /// `q_n(z, w, t)` for `n ≥ 1`; `rel_tol` is relative to the envelope
    /// `m_n(t) q(z,w,t)`.
    pub fn q_n_term(&self, n: usize, z: f64, w: f64, t: f64, rel_tol: f64) -> Result<DuhamelTerm> {
        if n == 0 {
            return Err(Error::Precondition("q_n_term needs n >= 1".into()));
        }
        if n > self.max_order {
            return Err(Error::Precondition(format!(
                "order {n} exceeds the enabled maximum {}",
                self.max_order
            )));
        }
        for (name, v) in [("z", z), ("w", w)] {
            if !(v > 0.0 && v < self.j) {
                return Err(Error::Precondition(format!("{name} = {v} must lie in (0, J) with J = {}", self.j)));
            }
        }
        if !(t > 0.0 && t < self.t_i) {
            return Err(Error::Precondition(format!("t = {t} must lie in (0, t_I) with t_I = {}", self.t_i)));
        }
        if self.nu > NU_MAX {
            return Err(Error::Domain(format!("nu = {} above {NU_MAX}", self.nu)));
        }
        let q = eval_q(self.nu, z, w, t)?.value;
        let envelope = self.errors.m(n, t) * q;
        let r = self.ratio(n, z, w, t, rel_tol);
        if !r.value.is_finite() {
            return Err(Error::Numerical(format!("q_{n} quadrature produced {}", r.value)));
        }
        let quad_error = r.abs_error * q;
        Ok(DuhamelTerm {
            n,
            value: r.value * q,
            quad_error,
            envelope,
            converged: quad_error <= 0.1 * envelope || envelope == 0.0 && quad_error == 0.0,
        })
    }

    /// Bound on `∫₀ᵗ∫ q(z,ξ,t−s)|V(ξ)|q(ξ,w,s) dξ ds / q(z,w,t)` from the
    /// Chapman–Kolmogorov inequality.
    fn slice_bound(&self, t: f64) -> f64 {
        let e = &self.errors;
        let c = if e.frak_b == 1.0 { 1.0 } else { e.frak_c };
        c * e.v_i * t.powf(e.frak_b) * beta(e.frak_b, e.frak_b)
    }

    /// `q_n / q` at `(z, w, t)` with an absolute error estimate.
    fn ratio(&self, n: usize, z: f64, w: f64, t: f64, rel_tol: f64) -> QuadResult {
        if self.potential.is_zero() {
            return QuadResult {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
                converged: true,
            };
        }
        let nu = self.nu;
        let target = ln_q(nu, z, w, t);
        let scale = self.errors.m(n, t).max(f64::MIN_POSITIVE);
        let inner_tol = rel_tol * scale / t;
        let inner_policy = QuadPolicy {
            rel_tol,
            abs_tol: 0.0,
            max_subdivisions: 200,
        };
        let extra = self.potential.breakpoints();
        let mut inner_err = 0.0f64;
        let mut rho_err = 0.0f64;
        let mut slice = |s: f64| -> f64 {
            if !(s > 0.0 && s < t) {
                return 0.0;
            }
            let br = bridge(z, w, t, s);
            let rho = if n >= 2 {
                let ys = Chebyshev::nodes(br.y_lo, br.y_hi, CHEB_NODES);
                let vals: Vec<f64> = ys
                    .iter()
                    .map(|&y| {
                        let xi = (y * y).max(f64::MIN_POSITIVE);
                        let r = self.ratio(n - 1, xi, w, s, rel_tol * 10.0);
                        rho_err = rho_err.max(r.abs_error);
                        r.value
                    })
                    .collect();
                let cheb = Chebyshev::fit(br.y_lo, br.y_hi, &vals);
                rho_err = rho_err.max(cheb.tail());
                Some(cheb)
            } else {
                None
            };
            let r = integrate_half_line_weighted(
                |xi| ln_q(nu, z, xi, t - s) + ln_q(nu, xi, w, s) - target,
                |xi| {
                    let v = self.potential.value(xi);
                    match &rho {
                        Some(c) if v != 0.0 => v * c.eval(xi.sqrt()),
                        _ => v,
                    }
                },
                &[(br.centre, br.spread)],
                &BRIDGE_OFFSETS,
                &extra,
                inner_tol,
                &inner_policy,
            );
            inner_err = inner_err.max(r.abs_error);
            r.value
        };
        // s = t(3u² − 2u³) flattens the endpoint behaviour at s = 0 and s = t
        let outer_policy = QuadPolicy {
            rel_tol,
            abs_tol: rel_tol * scale,
            max_subdivisions: 60,
        };
        let out = gauss_kronrod(
            |u| {
                let s = t * u * u * (3.0 - 2.0 * u);
                let ds = 6.0 * t * u * (1.0 - u);
                if ds == 0.0 {
                    0.0
                } else {
                    slice(s) * ds
                }
            },
            0.0,
            1.0,
            &outer_policy,
        );
        QuadResult {
            value: out.value,
            abs_error: out.abs_error + inner_err * t + rho_err * self.slice_bound(t),
            evaluations: out.evaluations,
            converged: out.converged,
        }
    }

    /// `Σ_{n<k} q_n(z,w,t)` with the certificate
    /// `(m_k M + D_k e^{−2J/(9t)}) q + Σ quad_error`.
    pub fn k_order_sum(&self, k: usize, z: f64, w: f64, t: f64, rel_tol: f64) -> Result<KOrderSum> {
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        for (name, v) in [("z", z), ("w", w)] {
            if !(v > 0.0 && v < self.j / 9.0) {
                return Err(Error::Region(format!(
                    "{name} = {v} outside the certified region (0, J/9) with J/9 = {}",
                    self.j / 9.0
                )));
            }
        }
        let tail = ratio_bound(self.j, self.nu, t)?;
        let q = eval_q(self.nu, z, w, t)?.value;
        let mut value = q;
        let mut quad = 0.0;
        let mut terms = Vec::with_capacity(k.saturating_sub(1));
        for n in 1..k {
            let term = self.q_n_term(n, z, w, t, rel_tol)?;
            value += term.value;
            quad += term.quad_error;
            terms.push(term);
        }
        let e = &self.errors;
        let certificate = (e.m(k, t) * e.big_m(t) + e.d(k, t) * tail) * q + quad;
        Ok(KOrderSum {
            value,
            certificate,
            terms,
            convention: e.convention,
        })
    }
}

/// `∫ q(z,ξ,t) q(ξ,w,s) ξ^{𝔟−1} dξ` divided by
/// `((t+s)/(ts))^{1−𝔟} q(z,w,t+s)`. The Chapman–Kolmogorov inequality
/// bounds it by `𝔠`.
pub fn ck_inequality_check(nu: f64, frak_b: f64, z: f64, w: f64, t: f64, s: f64) -> Result<f64> {
    for (name, v) in [("z", z), ("w", w), ("t", t), ("s", s), ("frak_b", frak_b)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} = {v} must be positive")));
        }
    }
    if !(nu <= NU_MAX) {
        return Err(Error::Domain(format!("nu = {nu} above {NU_MAX}")));
    }
    let target = ln_q(nu, z, w, t + s) + (1.0 - frak_b) * ((t + s) / (t * s)).ln();
    let br = bridge(z, w, t + s, s);
    let policy = QuadPolicy::with_rel_tol(1e-10);
    let r = integrate_half_line_weighted(
        |xi| ln_q(nu, z, xi, t) + ln_q(nu, xi, w, s) + (frak_b - 1.0) * xi.ln() - target,
        |_| 1.0,
        &[(br.centre, br.spread), (z, crate::modelkernel::spread(z, t)), (w, crate::modelkernel::spread(w, s))],
        &crate::modelkernel::DENSE_OFFSETS,
        &[],
        0.0,
        &policy,
    );
    if !r.value.is_finite() || !r.converged {
        return Err(Error::Numerical("CK inequality quadrature failed".into()));
    }
    Ok(r.value)
}
