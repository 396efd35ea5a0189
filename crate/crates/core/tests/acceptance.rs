//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines always reach the terminal. Pass
//! criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 5 6`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use degenkernel::cli::{bin_average, density_agreement};
use degenkernel::coeffs::{local_bounds, Problem};
use degenkernel::duhamel::{ck_inequality_check, ConstantPotential, ErrorSequence, Perturbation};
use degenkernel::kernel::{BudgetVariant, KernelModel};
use degenkernel::modelkernel::{check_ck, eval_q, ln_q, ln_q_bounds, y_hit_prob, y_hit_tail};
use degenkernel::sde::{
    empirical_density, exit_through_upper, simulate_wf, simulate_x, simulate_x_with, simulate_y_with, uniform_edges, Barriers,
    McConfig, Scheme,
};
use degenkernel::special::ck_constant;
use degenkernel::transform::{compute_frak_b, compute_nu, TransformBundle};
use degenkernel::wrightfisher::{wf_symmetry_residual, Side, WfKernel, WfProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYMMETRY_REL_TOL: f64 = 1e-12;
const CK_TOL: f64 = 1e-7;
const CK_QUAD_TOL: f64 = 1e-10;
/// Quadrature tolerance for the envelope sweep, relative to `m_n q`.
const ENVELOPE_QUAD_TOL: f64 = 1e-3;
const ORACLE_TOL: f64 = 1e-8;
const SIGMAS: f64 = 3.0;
const MC_PATHS: usize = 100_000;
const DENSITY_BINS: usize = 30;
const COVERAGE_SIGMAS: f64 = 3.0;
const COVERAGE_FRACTION: f64 = 0.95;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = fn() -> Outcome;

fn outcome(passed: bool, elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    let in_time = elapsed < limit;
    Outcome {
        passed: passed && in_time,
        detail: format!("{detail}; {:.1} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn z_score(mc: f64, se: f64, exact: f64) -> f64 {
    (mc - exact).abs() / se.max(1e-300)
}

fn model_kernel_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_sym, mut lower_bad, mut upper_bad, mut corrected_bad) = (0.0f64, 0, 0, 0);
    let mut first_upper = None;
    for _ in 0..10_000 {
        let nu = rng.gen_range(-2.0..0.99);
        let z = log_uniform(&mut rng, 1e-3, 10.0);
        let w = log_uniform(&mut rng, 1e-3, 10.0);
        let t = log_uniform(&mut rng, 1e-3, 10.0);
        let l = (1.0 - nu) * w.ln() + ln_q(nu, z, w, t);
        let r = (1.0 - nu) * z.ln() + ln_q(nu, w, z, t);
        // values beyond the f64 range are compared through their logarithms
        let rel = if l.abs().max(r.abs()) < 700.0 {
            (l - r).exp_m1().abs()
        } else {
            (l - r).abs() / l.abs().max(r.abs())
        };
        worst_sym = worst_sym.max(rel);
        let ln = ln_q(nu, z, w, t);
        let (lo, hi) = ln_q_bounds(nu, z, w, t);
        let slack = 1e-12 * ln.abs().max(1.0);
        if ln < lo - slack {
            lower_bad += 1;
        }
        if ln > hi + slack {
            upper_bad += 1;
            first_upper.get_or_insert((nu, z, w, t));
        }
        if ln > hi + ck_constant().ln() + slack {
            corrected_bad += 1;
        }
    }
    let passed = worst_sym <= SYMMETRY_REL_TOL && lower_bad == 0 && upper_bad == 0;
    let mut detail = format!(
        "max symmetry rel {worst_sym:.2e}; lower-bound violations {lower_bad}; stated upper-bound violations {upper_bad}/10000; with factor c: {corrected_bad}"
    );
    if let Some((nu, z, w, t)) = first_upper {
        detail += &format!("; first upper violation at nu={nu:.3}, z={z:.3e}, w={w:.3e}, t={t:.3e}");
    }
    outcome(passed, start.elapsed(), Duration::from_secs(10), detail)
}

fn chapman_kolmogorov() -> Outcome {
    let start = Instant::now();
    let times = [0.1, 0.5, 2.0];
    let points = [0.05, 0.5, 5.0];
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut errors = 0;
    for &nu in &[-1.0, 0.0, 1.0 / 3.0, 0.9] {
        for &t in &times {
            for &s in &times {
                for &z in &points {
                    for &w in &points {
                        count += 1;
                        match check_ck(nu, z, w, t, s, CK_QUAD_TOL) {
                            Ok(r) => worst = worst.max(r),
                            Err(_) => errors += 1,
                        }
                    }
                }
            }
        }
    }
    outcome(
        worst <= CK_TOL && errors == 0,
        start.elapsed(),
        Duration::from_secs(60),
        format!("max residual {worst:.2e} over {count} grid points, {errors} quadrature failures"),
    )
}

fn ck_inequality() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = ck_constant();
    let (mut worst, mut errors, mut done) = (0.0f64, 0, 0);
    while done < 100 {
        let alpha = match rng.gen_range(0..4) {
            0 => 1.0,
            _ => rng.gen_range(0.1..1.9),
        };
        let b0 = if alpha > 1.0 { 0.0 } else { rng.gen_range(0.0..0.95) };
        let p = Problem::constant_drift(alpha, b0, 1.0);
        let (nu, frak_b) = (compute_nu(&p), compute_frak_b(&p));
        if frak_b < nu {
            continue;
        }
        done += 1;
        let z = log_uniform(&mut rng, 1e-2, 5.0);
        let w = log_uniform(&mut rng, 1e-2, 5.0);
        let t = log_uniform(&mut rng, 1e-2, 2.0);
        let s = log_uniform(&mut rng, 1e-2, 2.0);
        match ck_inequality_check(nu, frak_b, z, w, t, s) {
            Ok(r) => worst = worst.max(r),
            Err(_) => errors += 1,
        }
    }
    outcome(
        worst <= c && errors == 0,
        start.elapsed(),
        Duration::from_secs(120),
        format!("max ratio {worst:.6} vs c = {c:.6} over 100 samples, {errors} quadrature failures"),
    )
}

fn duhamel_envelope() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checked, mut outside, mut unconverged, mut errors) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    for p in [Problem::constant_drift(0.5, 0.3, 1.0), Problem::wright_fisher(1.4, 1.0, 0.5)] {
        let bundle = TransformBundle::new(p).unwrap();
        let pert = Perturbation::from_bundle(&bundle).unwrap();
        for n in 1..=2 {
            for _ in 0..100 {
                let z = log_uniform(&mut rng, 1e-3 * bundle.j, bundle.j / 9.0);
                let w = log_uniform(&mut rng, 1e-3 * bundle.j, bundle.j / 9.0);
                let t = log_uniform(&mut rng, 1e-3 * bundle.t_i, bundle.t_i);
                checked += 1;
                match pert.q_n_term(n, z, w, t, ENVELOPE_QUAD_TOL) {
                    Ok(term) => {
                        if !term.within_envelope() {
                            outside += 1;
                        }
                        if !term.converged {
                            unconverged += 1;
                        }
                        if term.envelope > 0.0 {
                            worst = worst.max(term.value.abs() / term.envelope);
                        }
                    }
                    Err(_) => errors += 1,
                }
            }
        }
    }

    let v = 1.7;
    let nu = 0.3;
    let oracle = Perturbation::from_parts(nu, 1.0, ErrorSequence::new(1.0, ck_constant(), v), Arc::new(ConstantPotential::everywhere(v)));
    let mut worst_oracle = 0.0f64;
    for &(z, w, t) in &[(0.04, 0.06, 0.01), (0.2, 0.1, 0.05), (0.5, 0.6, 0.1), (0.01, 0.03, 0.02)] {
        let q = eval_q(nu, z, w, t).unwrap().value;
        for n in 1..=2usize {
            let exact = (v * t).powi(n as i32) / (1..=n).product::<usize>() as f64 * q;
            match oracle.q_n_term(n, z, w, t, 1e-10) {
                Ok(term) => worst_oracle = worst_oracle.max(((term.value - exact) / exact).abs()),
                Err(_) => errors += 1,
            }
        }
    }
    outcome(
        outside == 0 && errors == 0 && worst_oracle <= ORACLE_TOL,
        start.elapsed(),
        Duration::from_secs(300),
        format!(
            "{outside}/{checked} terms outside m_n q (max |q_n|/(m_n q) = {worst:.3}), {unconverged} flagged unconverged; constant-potential oracle max rel {worst_oracle:.2e}; {errors} errors"
        ),
    )
}

fn hitting_formulas() -> Outcome {
    let start = Instant::now();
    let mut worst_z = 0.0f64;
    let mut lines = Vec::new();
    let mut tails_ok = true;
    let mut seed = 500;
    let mut next_seed = || {
        seed += 1;
        seed
    };

    let (z0, j) = (0.2, 0.6);
    for &nu in &[-1.0, 0.0, 0.5] {
        let cfg = McConfig::new(MC_PATHS, 1e-4, next_seed());
        let (ph, se, _) = exit_through_upper(|br| simulate_y_with(nu, z0, 30.0, &cfg, br), j).unwrap();
        let z = z_score(ph, se, y_hit_prob(nu, z0, j).unwrap());
        worst_z = worst_z.max(z);
        lines.push(format!("Y nu={nu}: {z:.2} sigma"));
    }
    for &(alpha, b0) in &[(1.0, 0.0), (1.0, 0.4), (1.4, 0.0)] {
        let p = Problem::constant_drift(alpha, b0, 2.0);
        let bundle = TransformBundle::new(p.clone()).unwrap();
        let (x0, y) = (0.4, 1.2);
        let exact = bundle.scale_s(x0).unwrap() / bundle.scale_s(y).unwrap();
        let cfg = McConfig::new(MC_PATHS, 1e-4, next_seed());
        let (ph, se, _) = exit_through_upper(|br| simulate_x_with(&p, x0, 50.0, &cfg, br), y).unwrap();
        let z = z_score(ph, se, exact);
        worst_z = worst_z.max(z);
        lines.push(format!("X alpha={alpha} b0={b0}: {z:.2} sigma"));
    }

    for &(nu, t) in &[(0.0, 0.05), (0.5, 0.1), (-1.0, 0.08)] {
        let bound = y_hit_tail(nu, 0.2, 1.0, t).unwrap();
        let cfg = McConfig::new(MC_PATHS, t / 500.0, next_seed());
        let ens = simulate_y_with(nu, 0.2, t, &cfg, &Barriers { upper: Some(1.0), ..Barriers::default() }).unwrap();
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        tails_ok &= freq <= bound;
        lines.push(format!("Y tail nu={nu}: {freq:.2e} <= {bound:.2e}"));
    }
    let p = Problem::constant_drift(0.5, 0.3, 1.0);
    let lb = local_bounds(&p).unwrap();
    for &t in &[0.02, 0.05] {
        let (x0, i) = (0.4, 1.0);
        let gap = i - x0 - t * lb.b_i;
        let bound = (-(gap * gap) / (4.0 * t * i.powf(p.alpha) * lb.a_i)).exp();
        let cfg = McConfig::new(MC_PATHS, t / 500.0, next_seed());
        let ens = simulate_x_with(&p, x0, t, &cfg, &Barriers { upper: Some(i), ..Barriers::default() }).unwrap();
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        tails_ok &= freq <= bound;
        lines.push(format!("X tail t={t}: {freq:.2e} <= {bound:.2e}"));
    }
    outcome(worst_z <= SIGMAS && tails_ok, start.elapsed(), Duration::from_secs(300), lines.join(", "))
}

fn exact_case() -> (KernelModel, degenkernel::kernel::Localization) {
    let model = KernelModel::new(TransformBundle::new(Problem::constant_drift(1.0, 0.0, 2.0)).unwrap()).unwrap();
    let loc = model.localization(1.0).unwrap();
    (model, loc)
}

fn wf_left_cut(wf: &WfProblem, g: f64) -> f64 {
    let target = wf.phi(g, Side::Left).unwrap() / 9.0;
    let (mut lo, mut hi) = (0.0, g);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if wf.phi(mid, Side::Left).unwrap() <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn density_agreement_criterion() -> Outcome {
    let start = Instant::now();
    let (model, loc) = exact_case();
    let (x0, t) = (0.05, 0.01);
    let ens = simulate_x(&model.bundle.problem, x0, t, &McConfig::new(MC_PATHS, 2e-5, 601)).unwrap();
    let hist = empirical_density(&ens, &uniform_edges(0.0, loc.x_cut * (1.0 - 1e-9), DENSITY_BINS).unwrap()).unwrap();
    let (exact_worst, exact_bin) = density_agreement(&hist, |y| {
        let v = model.p_k_global(&loc, 2, x0, y.max(1e-12), t, BudgetVariant::Scale)?;
        Ok((v.value, v.certificate))
    })
    .unwrap();

    let wf = WfProblem::new(1.0, 1.0).unwrap();
    let (g, i, x0, t) = (0.3, 0.5, 0.02, 0.002);
    let kern = WfKernel::new(wf, Side::Left, g, i).unwrap();
    let cut = wf_left_cut(&wf, g);
    let ens = simulate_wf(&wf, x0, t, &McConfig::new(MC_PATHS, 4e-6, 602)).unwrap();
    let hist = empirical_density(&ens, &uniform_edges(0.0, cut, DENSITY_BINS).unwrap()).unwrap();
    let (wf_worst, wf_bin) = density_agreement(&hist, |y| {
        let v = kern.value(2, x0, y.max(1e-12), t)?;
        Ok((v.value, v.certificate))
    })
    .unwrap();
    outcome(
        exact_worst <= 1.0 && wf_worst <= 1.0,
        start.elapsed(),
        Duration::from_secs(600),
        format!("worst |MC - p|/max(3 sigma, cert): exact {exact_worst:.2} (bin {exact_bin}), WF {wf_worst:.2} (bin {wf_bin})"),
    )
}

fn certificate_soundness() -> Outcome {
    let start = Instant::now();
    let (model, loc) = exact_case();
    let (x0, t) = (0.05, 0.01);
    let mut identical = true;
    for k in 1..=3 {
        for a in 1..=5 {
            for b in 1..=5 {
                let (x, y) = (a as f64 / 6.0 * loc.x_cut, b as f64 / 6.0 * loc.x_cut);
                for &s in &[0.2 * t, t] {
                    let v = model.p_k_approx(k, x, y, s).unwrap();
                    identical &= v.value == model.p_approx(x, y, s).unwrap();
                }
            }
        }
    }

    let ens = simulate_x(&model.bundle.problem, x0, t, &McConfig::new(MC_PATHS, 2e-5, 701)).unwrap();
    let hist = empirical_density(&ens, &uniform_edges(0.0, loc.x_cut * (1.0 - 1e-9), DENSITY_BINS).unwrap()).unwrap();
    let budget = model.global_budget(&loc, 2, t, BudgetVariant::Scale).unwrap();
    let mut covered = 0;
    let mut worst_excess = 0.0f64;
    let mut missed = Vec::new();
    for bin in 0..hist.n_bins() {
        let (a, b) = hist.bin(bin);
        let approx = bin_average(|y| model.p_approx(x0, y.max(1e-12), t), a, b).unwrap();
        let excess = ((hist.density[bin] - approx).abs() - budget * approx) / hist.std_err[bin].max(f64::MIN_POSITIVE);
        worst_excess = worst_excess.max(excess);
        if excess <= COVERAGE_SIGMAS {
            covered += 1;
        } else {
            missed.push(format!("{bin}: {excess:.2} sigma"));
        }
    }
    let fraction = covered as f64 / hist.n_bins() as f64;
    outcome(
        identical && fraction >= COVERAGE_FRACTION,
        start.elapsed(),
        Duration::from_secs(600),
        format!(
            "V = 0 gives p^k-approx = p^approx: {identical}; budget {budget:.2e} + {COVERAGE_SIGMAS} sigma covers {covered}/{} bins (worst {worst_excess:.2} sigma; missed [{}])",
            hist.n_bins(),
            missed.join(", ")
        ),
    )
}

fn closed_form_constants() -> Outcome {
    let start = Instant::now();
    let c = ck_constant();
    let mut ok = format!("{c:.4}") == "1.1292" && format!("{c:.5}") == "1.12917";
    let mut worst = 0.0f64;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    for &(a, b, g, i) in &[(1.0, 1.0, 0.3, 0.5), (1.0, 1.0, 0.1, 0.5), (0.5, 1.5, 0.2, 0.6), (1.5, 0.5, 0.25, 0.4)] {
        let wf = WfProblem::new(a, b).unwrap();
        let k = wf.constants(Side::Left, g, i).unwrap();
        let theta = (2.0f64 / (2.0 - a)).powf(a / (2.0 * (2.0 - a))) * (1.0f64 - i).powf(-b / (2.0 * (2.0 - a)));
        let v = b / 16.0 * (4.0 - b + 2.0 * a) * (1.0f64 - i).powf(b / (2.0 - a) - 2.0);
        let m = f64::powf(a, a) * f64::powf(b, b) / f64::powf(a + b, a + b);
        let phi_g = if a == 1.0 && b == 1.0 { g.sqrt().asin().powi(2) } else { k.phi_level };
        let t_l = (4.0 * (2.0 - a) * phi_g / (9.0 * (3.0 - a))).min((i - g) * (i - g) / (4.0 * m));
        for (got, want) in [(k.theta_i, theta), (k.v_i, v), (k.m_ab, m), (k.t_side, t_l)] {
            worst = worst.max(rel(got, want));
        }
    }
    let wf = WfProblem::new(1.0, 1.0).unwrap();
    let k = wf.constants(Side::Left, 0.3, 0.5).unwrap();
    let ulps = |a: f64, b: f64| rel(a, b) <= 4.0 * f64::EPSILON;
    ok &= ulps(k.theta_i, 2.0) && ulps(k.v_i, 0.625) && ulps(k.m_ab, 0.25) && ulps(k.t_side, 0.04);
    ok &= worst <= 1e-13;
    outcome(ok, start.elapsed(), Duration::from_secs(1), format!("c = {c:.5}; max relative deviation {worst:.1e}"))
}

fn two_sided_consistency() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for &(a, b) in &[(1.0, 1.0), (0.6, 1.3)] {
        let wf = WfProblem::new(a, b).unwrap();
        let (g, i, h) = (0.3, 0.5, 0.7);
        let left = WfKernel::new(wf, Side::Left, g, i).unwrap();
        let right = WfKernel::new(wf, Side::Right, h, i).unwrap();
        let t = 0.2 * left.constants.t_side.min(right.constants.t_side);

        let (mut overlap, mut worst_overlap) = (0, 0.0f64);
        for n in 1..1000 {
            let x = n as f64 / 1000.0;
            if left.certifies(x, x, t) && right.certifies(x, x, t) {
                overlap += 1;
                let (l, r) = (left.value(2, x, x, t).unwrap(), right.value(2, x, x, t).unwrap());
                worst_overlap = worst_overlap.max((l.value - r.value).abs() / (l.certificate + r.certificate));
            }
        }

        let mirror = WfKernel::new(wf.mirrored(), Side::Right, 1.0 - g, 1.0 - i).unwrap();
        let cut = wf_left_cut(&wf, g);
        let (mut worst_mirror, mut worst_sym) = (0.0f64, 0.0f64);
        for &(fx, fy) in &[(0.2, 0.5), (0.5, 0.5), (0.7, 0.3), (0.9, 0.8)] {
            let (x, y) = (fx * cut, fy * cut);
            let l = left.value(2, x, y, t).unwrap();
            let m = mirror.value(2, 1.0 - x, 1.0 - y, t).unwrap();
            worst_mirror = worst_mirror.max((l.value - m.value).abs() / (l.certificate + m.certificate));
            let back = left.value(2, y, x, t).unwrap();
            let r = wf_symmetry_residual(&wf, l.value, back.value, x, y);
            worst_sym = worst_sym.max(r / (l.relative_certificate + back.relative_certificate));

            let (xr, yr) = (1.0 - x * (1.0 - h) / g, 1.0 - y * (1.0 - h) / g);
            if right.certifies(xr, yr, t) {
                let rv = right.value(2, xr, yr, t).unwrap();
                let rb = right.value(2, yr, xr, t).unwrap();
                let r = wf_symmetry_residual(&wf, rv.value, rb.value, xr, yr);
                worst_sym = worst_sym.max(r / (rv.relative_certificate + rb.relative_certificate));
            }
        }
        ok &= worst_overlap <= 1.0 && worst_mirror <= 1.0 && worst_sym <= 1.0;
        lines.push(format!(
            "({a},{b}): overlap {overlap}/999 grid points (worst gap/budget {worst_overlap:.1e}), mirror/budget {worst_mirror:.1e}, symmetry/budget {worst_sym:.1e}"
        ));
    }
    outcome(ok, start.elapsed(), Duration::from_secs(120), lines.join("; "))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let p = Problem::constant_drift(0.5, 0.3, 2.0);
    let cfg = McConfig::new(20_000, 1e-4, 1001);
    let base = simulate_x(&p, 0.3, 0.02, &cfg.with_threads(1)).unwrap().fingerprint();
    let mut ok = base == simulate_x(&p, 0.3, 0.02, &cfg.with_threads(1)).unwrap().fingerprint();
    for threads in [2, 4] {
        ok &= base == simulate_x(&p, 0.3, 0.02, &cfg.with_threads(threads)).unwrap().fingerprint();
    }
    let z = cfg.with_scheme(Scheme::TransformedZ);
    ok &= simulate_x(&p, 0.3, 0.02, &z.with_threads(1)).unwrap().fingerprint() == simulate_x(&p, 0.3, 0.02, &z.with_threads(3)).unwrap().fingerprint();

    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/exact.toml");
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_degenkernel"))
            .args(["mc", "--config", config, "--grid", "x=0.05,y=0:0.3:30,t=0.01", "--paths", "20000", "--seed", "9"])
            .env("DEGENKERNEL_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b, c) = (run("1"), run("1"), run("4"));
    let cli_ok = a.status.success() && a.stdout == b.stdout && a.stdout == c.stdout;
    outcome(
        ok && cli_ok,
        start.elapsed(),
        Duration::from_secs(600),
        format!("library fingerprints identical: {ok}; CLI output identical across runs and 1/4 workers: {cli_ok}"),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("model-kernel identities", model_kernel_identities),
        ("chapman-kolmogorov", chapman_kolmogorov),
        ("ck inequality constant", ck_inequality),
        ("duhamel envelope", duhamel_envelope),
        ("hitting formulas vs MC", hitting_formulas),
        ("density agreement", density_agreement_criterion),
        ("certificate soundness", certificate_soundness),
        ("closed-form constants", closed_form_constants),
        ("two-sided consistency", two_sided_consistency),
        ("determinism", determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let n = n + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().map(String::as_str).or_else(|| e.downcast_ref::<&str>().copied()).unwrap_or("?")
            ),
        });
        if !result.passed {
            failures += 1;
        }
        println!("criterion {n:>2} {name}: {} ({})", if result.passed { "PASS" } else { "FAIL" }, result.detail);
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
