//! Monte Carlo behaviour of the full pipeline under null and outlier models.

use dast_core::{run_study, DastConfig, Distribution, Injection, InjectionSpec};

const N: usize = 1000;

fn null_rate(dist: Distribution, xi: f64, reps: usize) -> f64 {
    let cfg = DastConfig::new(200, 200).with_xi(Some(xi));
    run_study(&dist, None, &cfg, N, reps, 2024)
        .unwrap()
        .type1_rate
}

#[test]
fn known_xi_pareto_null_is_calibrated() {
    let rate = null_rate(Distribution::Pareto { alpha: 1.0 }, 1.0, 1000);
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn known_xi_exponential_null_is_calibrated() {
    let rate = null_rate(
        Distribution::Weibull {
            lambda: 1.0,
            tau: 1.0,
        },
        0.0,
        1000,
    );
    assert!((0.03..=0.07).contains(&rate), "{rate}");
}

#[test]
fn uniform_null_over_rejects_like_the_reference_table() {
    // close top spacings at xi = -1 inflate T near k0 = 0, so even with the
    // index known the null rate sits near 0.5 at k = k* = 200
    let rate = null_rate(Distribution::Beta { p: 1.0, q: 1.0 }, -1.0, 1000);
    assert!((0.42..=0.58).contains(&rate), "{rate}");
}

#[test]
fn beta_null_with_known_index() {
    let rate = null_rate(Distribution::Beta { p: 1.0, q: 2.0 }, -0.5, 1000);
    assert!((0.05..=0.11).contains(&rate), "{rate}");
}

#[test]
fn half_t_null_with_estimated_index() {
    let cfg = DastConfig::new(400, 400);
    let m = run_study(&Distribution::StudentT { nu: 2.0 }, None, &cfg, N, 500, 7).unwrap();
    assert_eq!(m.failures, 0);
    assert!((m.type1_rate - 0.038).abs() < 0.025, "{}", m.type1_rate);
}

#[test]
fn exponentiated_outliers_are_recovered() {
    let cfg = DastConfig::new(400, 400);
    let inj = InjectionSpec {
        kind: Injection::Exponentiated { l: 10.0 },
        k0: 10,
    };
    let m = run_study(
        &Distribution::StudentT { nu: 2.0 },
        Some(&inj),
        &cfg,
        N,
        500,
        8,
    )
    .unwrap();
    assert!((7.9..=8.9).contains(&m.mean_k0), "{}", m.mean_k0);
    assert!((1.4..=2.6).contains(&m.sd_k0), "{}", m.sd_k0);
}

#[test]
fn shrunk_top_block_is_detected_above_null_rate() {
    let cfg = DastConfig::new(400, 400);
    let inj = InjectionSpec {
        kind: Injection::Exponentiated { l: 0.05 },
        k0: 5,
    };
    let dist = Distribution::StudentT { nu: 2.0 };
    let shrunk = run_study(&dist, Some(&inj), &cfg, N, 500, 9)
        .unwrap()
        .type1_rate;
    let null = run_study(&dist, None, &cfg, N, 500, 9).unwrap().type1_rate;
    assert!(
        shrunk > 0.25 && shrunk > 5.0 * null,
        "shrunk {shrunk}, null {null}"
    );
}

#[test]
fn larger_k_star_lowers_type1_error_with_estimated_index() {
    let dist = Distribution::Burr {
        eta: 1.0,
        lambda: 0.5,
        tau: 8.0,
    };
    let rate = |k_star| {
        run_study(&dist, None, &DastConfig::new(200, k_star), N, 500, 10)
            .unwrap()
            .type1_rate
    };
    let (small, large) = (rate(100), rate(300));
    assert!(small - large >= 0.3, "k*=100: {small}, k*=300: {large}");
}
