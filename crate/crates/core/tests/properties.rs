use degenkernel::cli::fmt_f64;
use degenkernel::coeffs::Problem;
use degenkernel::duhamel::ck_inequality_check;
use degenkernel::modelkernel::{eval_q, eval_q_series, ln_q, ln_q_bounds, mass_q, mass_q_closed_form};
use degenkernel::sde::{empirical_density, simulate_y, uniform_edges, McConfig};
use degenkernel::special::ck_constant;
use degenkernel::transform::TransformBundle;
use degenkernel::wrightfisher::{Side, WfProblem};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #[test]
    fn q_weighted_symmetry(nu in -2.0f64..0.99, z in log_uniform(1e-3, 10.0), w in log_uniform(1e-3, 10.0), t in log_uniform(1e-3, 10.0)) {
        let l = (1.0 - nu) * w.ln() + ln_q(nu, z, w, t);
        let r = (1.0 - nu) * z.ln() + ln_q(nu, w, z, t);
        prop_assert!((l - r).abs() <= 1e-12 * l.abs().max(r.abs()).max(1.0), "{l} vs {r}");
    }

    #[test]
    fn q_lower_bound_and_corrected_upper_bound(nu in -2.0f64..0.99, z in log_uniform(1e-3, 10.0), w in log_uniform(1e-3, 10.0), t in log_uniform(1e-3, 10.0)) {
        let ln = ln_q(nu, z, w, t);
        let (lo, hi) = ln_q_bounds(nu, z, w, t);
        let slack = 1e-12 * ln.abs().max(1.0);
        prop_assert!(ln >= lo - slack);
        prop_assert!(ln <= hi + ck_constant().ln() + slack);
    }

    #[test]
    fn q_routes_agree(nu in -20.0f64..0.99, z in log_uniform(1e-3, 10.0), w in log_uniform(1e-3, 10.0), t in log_uniform(1e-2, 10.0)) {
        let a = eval_q(nu, z, w, t).unwrap().log_value;
        let b = eval_q_series(nu, z, w, t).unwrap().log_value;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn mass_is_a_sub_probability(nu in -2.0f64..0.99, z in log_uniform(1e-2, 5.0), t in log_uniform(1e-2, 5.0)) {
        let m = mass_q(nu, z, t).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
        prop_assert!((m - mass_q_closed_form(nu, z, t)).abs() < 1e-8);
    }

    #[test]
    fn wright_fisher_mirror(alpha in 0.05f64..1.95, beta in 0.05f64..1.95, x in 0.001f64..0.999) {
        let wf = WfProblem::new(alpha, beta).unwrap();
        let m = wf.mirrored();
        let r = wf.incomplete_beta_transform(x, Side::Right).unwrap();
        let l = m.incomplete_beta_transform(1.0 - x, Side::Left).unwrap();
        prop_assert!((r - l).abs() <= 1e-11 * l);
        prop_assert_eq!(wf.nu(Side::Right), m.nu(Side::Left));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        prop_assert!(close(wf.theta_i(Side::Right, x), m.theta_i(Side::Left, 1.0 - x)));
        prop_assert!(close(wf.v_i(Side::Right, x), m.v_i(Side::Left, 1.0 - x)));
    }

    #[test]
    fn wright_fisher_phi_sandwich(alpha in 0.05f64..1.95, beta in 0.05f64..1.95, x in 0.001f64..0.999) {
        let wf = WfProblem::new(alpha, beta).unwrap();
        let phi = wf.phi(x, Side::Left).unwrap();
        let base = x.powf(2.0 - alpha) / (2.0 - alpha).powi(2);
        prop_assert!(phi >= base * (1.0 - 1e-12));
        prop_assert!(phi <= base * (1.0 - x).powf(-beta) * (1.0 + 1e-12));
    }

    #[test]
    fn transform_round_trip(alpha in 0.1f64..1.9, b0 in 0.0f64..0.8, x in 1e-3f64..1.9) {
        let b0 = if alpha > 1.0 { 0.0 } else { b0 };
        let bundle = TransformBundle::new(Problem::constant_drift(alpha, b0, 2.0)).unwrap();
        let back = bundle.psi(bundle.phi(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x);
    }

    #[test]
    fn f64_output_round_trips(v in proptest::num::f64::NORMAL) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ck_inequality_constant(alpha in 0.1f64..1.9, z in log_uniform(1e-2, 2.0), w in log_uniform(1e-2, 2.0), t in log_uniform(1e-2, 1.0), s in log_uniform(1e-2, 1.0)) {
        let nu = (1.0 - alpha) / (2.0 - alpha);
        let frak_b = if alpha >= 1.0 { 1.0 } else { nu };
        let r = ck_inequality_check(nu, frak_b, z, w, t, s).unwrap();
        prop_assert!(r <= ck_constant() * (1.0 + 1e-9), "{r}");
    }

    #[test]
    fn histogram_integrates_to_survival(seed in any::<u64>(), z0 in 0.05f64..1.0) {
        let ens = simulate_y(0.2, z0, 0.1, &McConfig::new(300, 1e-3, seed)).unwrap();
        let h = empirical_density(&ens, &uniform_edges(0.0, 20.0, 30).unwrap()).unwrap();
        prop_assert!((h.integral() - h.survivor_fraction).abs() < 1e-12);
        prop_assert_eq!(h.survivor_fraction, 1.0 - h.absorbed_fraction);
    }

    #[test]
    fn ensembles_ignore_worker_count(seed in any::<u64>(), threads in 1usize..5) {
        let cfg = McConfig::new(200, 1e-3, seed);
        let a = simulate_y(0.4, 0.3, 0.2, &cfg.with_threads(1)).unwrap();
        let b = simulate_y(0.4, 0.3, 0.2, &cfg.with_threads(threads)).unwrap();
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
    }
}
