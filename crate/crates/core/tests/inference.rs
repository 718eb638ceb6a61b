mod common;

use common::*;
use hdinfer::inference::{group_statistic, DEFAULT_XI};
use hdinfer::lasso::default_lambda0;
use hdinfer::simlab::standard_gaussian_matrix;
use hdinfer::{
    build_design, corrected_fit, group_pvalue, ridge_covariance, scaled_lasso_fit, single_pvalues,
    GroupHypothesis, MonteCarloConfig,
};
use proptest::prelude::*;

#[test]
fn corrected_estimator_decomposes_into_noise_and_bias() {
    for (i, (n, p)) in [(20, 40), (30, 25), (15, 60), (40, 40)].into_iter().enumerate() {
        let r = decomposition_residual(n, p, 100 + i as u64);
        assert!(r <= 1e-10, "n={n} p={p}: residual {r}");
    }
}

#[test]
fn scaled_lasso_noise_estimate_is_reasonable() {
    // (M1)-style: n = 100, p = 200, s0 = 3, b = 1, σ = 1; one design per seed.
    let (n, p) = (100, 200);
    for seed in 0..50u64 {
        let x = standard_gaussian_matrix(n, p, seed);
        let ctx = build_design(&x, true).unwrap();
        let eps = standard_gaussian_matrix(n, 1, 10_000 + seed);
        let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] + x[(i, 1)] + x[(i, 2)] + eps[(i, 0)]).collect();
        let init = scaled_lasso_fit(&ctx, &y, default_lambda0(n, p)).unwrap();
        assert!(init.converged, "seed {seed}: {} iterations", init.iterations);
        assert!((0.7..=1.3).contains(&init.sigma_hat), "seed {seed}: {}", init.sigma_hat);
    }
}

#[test]
fn strong_group_signal_is_detected_and_null_group_is_not() {
    let (n, p) = (60, 120);
    let x = standard_gaussian_matrix(n, p, 5);
    let ctx = build_design(&x, true).unwrap();
    let eps = standard_gaussian_matrix(n, 1, 6);
    let y: Vec<f64> = (0..n).map(|i| 3.0 * x[(i, 0)] + eps[(i, 0)]).collect();
    let cov = ridge_covariance(&ctx, 1.0 / n as f64).unwrap();
    let init = scaled_lasso_fit(&ctx, &y, default_lambda0(n, p)).unwrap();
    let fit = corrected_fit(&ctx, &cov, &init, &y, DEFAULT_XI).unwrap();
    let mc = MonteCarloConfig { draws: 4_000, seed: 1 };
    let hit = GroupHypothesis::new("hit", (0..20).collect(), p).unwrap();
    let miss = GroupHypothesis::new("miss", (100..120).collect(), p).unwrap();
    assert!(group_pvalue(&fit, &cov, &ctx, &hit, &mc).unwrap() <= 0.01);
    assert!(group_pvalue(&fit, &cov, &ctx, &miss, &mc).unwrap() > 0.05);
    assert!(group_statistic(&fit, &hit) >= fit.stats[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pvalues_are_probabilities_and_decrease_in_the_statistic(
        n in 10usize..40,
        p in 5usize..60,
        seed in any::<u64>(),
        xi in 0.01f64..0.49,
    ) {
        let x = standard_gaussian_matrix(n, p, seed);
        let ctx = build_design(&x, true).unwrap();
        let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] + x[(i, 1 % p)]).collect::<Vec<_>>();
        let eps = standard_gaussian_matrix(n, 1, seed ^ 7);
        let y: Vec<f64> = y.iter().zip(eps.iter()).map(|(a, b)| a + b).collect();
        let cov = ridge_covariance(&ctx, 1.0 / n as f64).unwrap();
        let init = scaled_lasso_fit(&ctx, &y, default_lambda0(n, p)).unwrap();
        let fit = corrected_fit(&ctx, &cov, &init, &y, xi).unwrap();
        let pv = single_pvalues(&fit);
        for j in 0..p {
            prop_assert!((0.0..=1.0).contains(&pv[j]));
            prop_assert!(fit.delta[j] >= 0.0);
            for k in 0..p {
                let (sj, sk) = (fit.stats[j] - fit.delta[j], fit.stats[k] - fit.delta[k]);
                if sj <= sk {
                    prop_assert!(pv[j] >= pv[k]);
                }
            }
        }
    }

    #[test]
    fn decomposition_holds_on_random_shapes(
        n in 8usize..30,
        p in 4usize..50,
        seed in 0u64..1_000_000,
    ) {
        prop_assume!(p >= 3);
        prop_assert!(decomposition_residual(n, p, seed) <= 1e-10);
    }
}
