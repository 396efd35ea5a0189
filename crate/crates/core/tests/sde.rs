use degenkernel::cli::bin_average;
use degenkernel::coeffs::{local_bounds, Problem};
use degenkernel::modelkernel::{eval_q, mass_q, y_hit_prob, y_hit_tail};
use degenkernel::sde::{
    chi_square_p_value, count_downward_crossings, empirical_density, exit_through_upper, ks_two_sample, simulate_x, simulate_x_with,
    simulate_y, simulate_y_with, uniform_edges, Barriers, McConfig, Scheme,
};
use degenkernel::transform::TransformBundle;

fn z_score(mc: f64, se: f64, exact: f64) -> f64 {
    (mc - exact) / se.max(1e-300)
}

#[test]
fn exact_case_absorption_matches_mass() {
    let (z0, t) = (0.5, 0.5);
    let p = Problem::constant_drift(1.0, 0.0, 10.0);
    let ens = simulate_x(&p, z0, t, &McConfig::new(20_000, 2.5e-4, 11)).unwrap();
    let (absorbed, se) = ens.absorption_probability();
    let exact = 1.0 - mass_q(0.0, z0, t).unwrap();
    let z = z_score(absorbed, se, exact);
    assert!(z.abs() < 3.0, "absorbed {absorbed} vs {exact}, z = {z}");
}

#[test]
fn y_hitting_probability_power_law() {
    let (z0, j) = (0.2, 0.6);
    for (k, &nu) in [-1.0, 0.0, 0.5].iter().enumerate() {
        let cfg = McConfig::new(20_000, 1e-4, 20 + k as u64);
        let (ph, se, undecided) = exit_through_upper(|br| simulate_y_with(nu, z0, 30.0, &cfg, br), j).unwrap();
        let exact = y_hit_prob(nu, z0, j).unwrap();
        let z = z_score(ph, se, exact);
        assert!(undecided < 1e-3);
        assert!(z.abs() < 3.0, "nu = {nu}: {ph} vs {exact}, z = {z}");
    }
}

#[test]
fn x_hitting_probability_scale_ratio() {
    let p = Problem::constant_drift(1.0, 0.4, 2.0);
    let bundle = TransformBundle::new(p.clone()).unwrap();
    let (x0, y) = (0.4, 1.2);
    let exact = bundle.scale_s(x0).unwrap() / bundle.scale_s(y).unwrap();
    let cfg = McConfig::new(20_000, 1e-4, 31);
    let (ph, se, _) = exit_through_upper(|br| simulate_x_with(&p, x0, 50.0, &cfg, br), y).unwrap();
    let z = z_score(ph, se, exact);
    assert!(z.abs() < 3.0, "{ph} vs {exact}, z = {z}");
}

#[test]
fn y_tail_bound_is_never_exceeded() {
    let (z0, j) = (0.2, 1.0);
    for &(nu, t) in &[(0.0, 0.05), (0.5, 0.1), (-1.0, 0.08)] {
        let bound = y_hit_tail(nu, z0, j, t).unwrap();
        let cfg = McConfig::new(20_000, t / 500.0, 41);
        let ens = simulate_y_with(nu, z0, t, &cfg, &Barriers { upper: Some(j), ..Barriers::default() }).unwrap();
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        assert!(freq <= bound, "nu = {nu}: {freq} > {bound}");
    }
}

#[test]
fn x_tail_bound_is_never_exceeded() {
    let p = Problem::constant_drift(0.5, 0.3, 1.0);
    let lb = local_bounds(&p).unwrap();
    let (x0, i) = (0.4, 1.0);
    for &t in &[0.02, 0.05] {
        let gap = i - x0 - t * lb.b_i;
        let bound = (-(gap * gap) / (4.0 * t * i.powf(p.alpha) * lb.a_i)).exp();
        let cfg = McConfig::new(20_000, t / 500.0, 51);
        let ens = simulate_x_with(&p, x0, t, &cfg, &Barriers { upper: Some(i), ..Barriers::default() }).unwrap();
        let (freq, _) = ens.fraction(ens.hit_right_boundary);
        assert!(freq <= bound, "t = {t}: {freq} > {bound}");
    }
}

#[test]
fn y_histogram_chi_square() {
    let (nu, z0, t) = (0.0, 0.5, 0.2);
    let n = 100_000;
    let ens = simulate_y(nu, z0, t, &McConfig::new(n, t / 2000.0, 61)).unwrap();
    let edges = uniform_edges(0.0, 3.0, 30).unwrap();
    let hist = empirical_density(&ens, &edges).unwrap();
    let mut counts: Vec<usize> = (0..30)
        .map(|i| ens.terminal_values.iter().filter(|&&v| v >= edges[i] && v < edges[i + 1]).count())
        .collect();
    let mut expected = Vec::new();
    for i in 0..30 {
        let (a, b) = hist.bin(i);
        let h = (b - a) / 4.0;
        let mut m = 0.0;
        for s in 0..4 {
            let lo = a + s as f64 * h;
            m += h * bin_average(|w| Ok(eval_q(nu, z0, w.max(1e-300), t)?.value), lo, lo + h).unwrap();
        }
        expected.push(n as f64 * m);
    }
    let mass = mass_q(nu, z0, t).unwrap();
    let inside: f64 = expected.iter().sum::<f64>() / n as f64;
    counts.push(ens.terminal_values.iter().filter(|&&v| v >= 3.0).count());
    expected.push(n as f64 * (mass - inside).max(0.0));
    counts.push(n - ens.alive());
    expected.push(n as f64 * (1.0 - mass));
    let (stat, pval, dof) = chi_square_p_value(&counts, &expected, 0).unwrap();
    assert!(pval > 0.01, "chi2 = {stat} on {dof} dof, p = {pval}");
}

#[test]
fn negative_nu_is_eventually_absorbed() {
    let cfg = McConfig::new(2_000, 1e-3, 71);
    let early = simulate_y(-1.0, 0.5, 0.2, &cfg).unwrap().absorption_probability().0;
    let late = simulate_y(-1.0, 0.5, 5.0, &cfg).unwrap().absorption_probability().0;
    assert!(late > early);
    assert!(late > 0.99, "{late}");
}

#[test]
fn schemes_agree_on_survivors() {
    for &(alpha, b0) in &[(1.0, 0.3), (1.4, 0.0)] {
        let p = Problem::constant_drift(alpha, b0, 2.0);
        let cfg = McConfig::new(20_000, 1e-4, 81);
        let e = simulate_x(&p, 0.3, 0.05, &cfg).unwrap();
        let z = simulate_x(&p, 0.3, 0.05, &cfg.with_scheme(Scheme::TransformedZ)).unwrap();
        let (d, pval) = ks_two_sample(&e.terminal_values, &z.terminal_values);
        assert!(pval > 0.01, "alpha = {alpha}: D = {d}, p = {pval}");
    }
}

#[test]
fn dt_halving_moves_absorption_little() {
    let p = Problem::constant_drift(1.0, 0.0, 10.0);
    let coarse = simulate_x(&p, 0.5, 0.5, &McConfig::new(20_000, 5e-4, 91)).unwrap().absorption_probability();
    let fine = simulate_x(&p, 0.5, 0.5, &McConfig::new(20_000, 2.5e-4, 91)).unwrap().absorption_probability();
    let sigma = (coarse.1 * coarse.1 + fine.1 * fine.1).sqrt();
    assert!((coarse.0 - fine.0).abs() < 2.0 * sigma, "{coarse:?} vs {fine:?}");
}

#[test]
fn crossing_frequency_below_bound() {
    let p = Problem::constant_drift(1.0, 0.2, 1.0);
    let bundle = TransformBundle::new(p.clone()).unwrap();
    let lb = local_bounds(&p).unwrap();
    let (x0, g, i, t) = (0.2, 0.4, 1.0, 0.4);
    let stats = count_downward_crossings(&p, x0, g, i, t, &McConfig::new(20_000, 1e-3, 101)).unwrap();
    let ratio = bundle.scale_s(x0).unwrap() / bundle.scale_s(g).unwrap();
    let gap = i - g - t * lb.b_i;
    for (n, &(freq, _)) in stats.probabilities.iter().enumerate() {
        let bound = ratio * (-((n + 1) as f64) * gap * gap / (4.0 * t * i.powf(p.alpha) * lb.a_i)).exp();
        assert!(freq <= bound, "n = {}: {freq} > {bound}", n + 1);
    }
    assert!(stats.probabilities[0].0 > 0.0);
}

#[test]
fn tiny_horizon_has_no_crossings() {
    let p = Problem::constant_drift(1.0, 0.2, 1.0);
    let stats = count_downward_crossings(&p, 0.2, 0.4, 1.0, 1e-3, &McConfig::new(5_000, 1e-5, 3)).unwrap();
    assert!(stats.ensemble.crossing_counts.iter().all(|&c| c == 0));
    assert_eq!(stats.probabilities[0].0, 0.0);
}

#[test]
fn fully_absorbed_ensemble_has_zero_density() {
    let ens = simulate_y(-1.5, 1e-3, 3.0, &McConfig::new(500, 1e-2, 5)).unwrap();
    assert_eq!(ens.alive(), 0);
    let hist = empirical_density(&ens, &uniform_edges(0.0, 1.0, 10).unwrap()).unwrap();
    assert!(hist.empty);
    assert!(hist.density.iter().all(|&d| d == 0.0));
    assert_eq!(hist.survivor_fraction, 0.0);
}
