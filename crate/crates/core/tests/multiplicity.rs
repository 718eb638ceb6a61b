mod common;

use common::*;
use hdinfer::multiplicity::{bonferroni_holm, simulate_group_fz, NullDistribution, NullKind};
use hdinfer::simlab::equicorrelated_matrix;
use hdinfer::{
    adjust_pvalues, build_design, ridge_covariance, simulate_fz, GroupHypothesis, MonteCarloConfig,
};
use proptest::prelude::*;

fn within_se(empirical: f64, expected: f64, draws: usize, k: f64) -> bool {
    let se = (expected * (1.0 - expected) / draws as f64).sqrt();
    (empirical - expected).abs() <= k * se.max(1.0 / draws as f64)
}

#[test]
fn independent_design_matches_closed_form() {
    let p = 50;
    let ctx = build_design(&cosine_design(100, p), true).unwrap();
    let cov = ridge_covariance(&ctx, 0.01).unwrap();
    let mc = MonteCarloConfig { draws: 100_000, seed: 17 };
    let fz = simulate_fz(&ctx, &cov, &mc).unwrap();
    for c in [0.001f64, 0.01, 0.05] {
        let expect = 1.0 - (1.0 - c).powi(p as i32);
        assert!(within_se(fz.cdf(c), expect, mc.draws, 3.0), "c={c}: {} vs {expect}", fz.cdf(c));
    }
}

#[test]
fn single_coefficient_null_is_uniform() {
    let ctx = build_design(&cosine_design(10, 1), true).unwrap();
    let cov = ridge_covariance(&ctx, 0.1).unwrap();
    let mc = MonteCarloConfig { draws: 100_000, seed: 3 };
    let fz = simulate_fz(&ctx, &cov, &mc).unwrap();
    let d = ks_one_sample(&fz.sorted_min_pvalues, |u| u.clamp(0.0, 1.0));
    assert!(d < KS_CRIT_1PCT / (mc.draws as f64).sqrt(), "KS distance {d}");
}

#[test]
fn positive_dependence_is_dominated_by_independence() {
    // Gaussian maxima are stochastically smaller under correlation, so
    // F_Z(c) ≤ 1 − (1 − c)^p.
    let p = 60;
    let ctx = build_design(&equicorrelated_matrix(40, p, 0.8, 8), true).unwrap();
    let cov = ridge_covariance(&ctx, 1.0 / 40.0).unwrap();
    let mc = MonteCarloConfig { draws: 20_000, seed: 4 };
    let fz = simulate_fz(&ctx, &cov, &mc).unwrap();
    for c in [0.001f64, 0.01, 0.05, 0.2] {
        let bound = 1.0 - (1.0 - c).powi(p as i32);
        let se = (bound * (1.0 - bound) / mc.draws as f64).sqrt();
        assert!(fz.cdf(c) <= bound + 3.0 * se, "c={c}");
    }
    // and at least the single-coefficient level
    for c in [0.01, 0.05] {
        assert!(fz.cdf(c) >= c - 3.0 * (c * (1.0 - c) / mc.draws as f64).sqrt());
    }
}

#[test]
fn simulated_adjustment_is_no_more_conservative_than_bonferroni() {
    let p = 80;
    let ctx = build_design(&equicorrelated_matrix(50, p, 0.5, 21), true).unwrap();
    let cov = ridge_covariance(&ctx, 0.02).unwrap();
    let mc = MonteCarloConfig { draws: 20_000, seed: 22 };
    let fz = simulate_fz(&ctx, &cov, &mc).unwrap();
    let raw: Vec<f64> = (0..p).map(|j| 1e-4 * (j + 1) as f64).collect();
    let adj = adjust_pvalues(&raw, &fz, 0.0);
    let holm = bonferroni_holm(&raw);
    // The smallest Holm p-value is plain Bonferroni, an upper bound on F_Z.
    let se = (holm[0] * (1.0 - holm[0]) / mc.draws as f64).sqrt();
    assert!(adj[0] <= holm[0] + 3.0 * se, "{} vs {}", adj[0], holm[0]);
}

fn orthogonal_setup(p: usize) -> (hdinfer::DesignContext, hdinfer::RidgeCovariance) {
    let ctx = build_design(&cosine_design(2 * p + 2, p), true).unwrap();
    let cov = ridge_covariance(&ctx, 0.05).unwrap();
    (ctx, cov)
}

#[test]
fn single_group_adjustment_is_identity_in_law() {
    let (ctx, cov) = orthogonal_setup(12);
    let g = GroupHypothesis::new("g", (0..6).collect(), 12).unwrap();
    let mc = MonteCarloConfig { draws: 20_000, seed: 6 };
    let fz = simulate_group_fz(&[g], &ctx, &cov, &[0.0; 12], &mc).unwrap();
    assert_eq!(fz.kind, NullKind::Group);
    for c in [0.01, 0.05, 0.2, 0.5] {
        assert!(within_se(fz.cdf(c), c, mc.draws, 3.0), "c={c}: {}", fz.cdf(c));
    }
}

#[test]
fn duplicated_groups_do_not_change_the_null() {
    let (ctx, cov) = orthogonal_setup(10);
    let g = GroupHypothesis::new("g", vec![1, 4, 7], 10).unwrap();
    let delta: Vec<f64> = (0..10).map(|j| 0.05 * j as f64).collect();
    let mc = MonteCarloConfig { draws: 5_000, seed: 8 };
    let once = simulate_group_fz(std::slice::from_ref(&g), &ctx, &cov, &delta, &mc).unwrap();
    let twice = simulate_group_fz(&[g.clone(), g], &ctx, &cov, &delta, &mc).unwrap();
    assert_eq!(once, twice);
}

#[test]
fn disjoint_singletons_follow_independence() {
    let m = 8;
    let (ctx, cov) = orthogonal_setup(m);
    let groups: Vec<GroupHypothesis> = (0..m)
        .map(|j| GroupHypothesis::new(format!("g{j}"), vec![j], m).unwrap())
        .collect();
    let mc = MonteCarloConfig { draws: 40_000, seed: 9 };
    let fz = simulate_group_fz(&groups, &ctx, &cov, &vec![0.0; m], &mc).unwrap();
    for c in [0.005f64, 0.02, 0.1] {
        let expect = 1.0 - (1.0 - c).powi(m as i32);
        assert!(within_se(fz.cdf(c), expect, mc.draws, 3.5), "c={c}: {} vs {expect}", fz.cdf(c));
    }
}

#[test]
fn group_family_validation() {
    let (ctx, cov) = orthogonal_setup(5);
    let mc = MonteCarloConfig { draws: 1_000, seed: 0 };
    assert!(simulate_group_fz(&[], &ctx, &cov, &[0.0; 5], &mc).is_err());
    let g = GroupHypothesis::new("g", vec![0], 5).unwrap();
    assert!(simulate_group_fz(&[g], &ctx, &cov, &[0.0; 4], &mc).is_err());
}

fn uniform_grid(b: usize) -> NullDistribution {
    let ctx = build_design(&cosine_design(6, 1), true).unwrap();
    let cov = ridge_covariance(&ctx, 0.1).unwrap();
    simulate_fz(&ctx, &cov, &MonteCarloConfig { draws: b, seed: 1 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjusted_pvalues_are_monotone_and_bounded(
        raw in prop::collection::vec(0.0f64..=1.0, 1..40),
        zeta in 0.0f64..0.05,
    ) {
        let fz = uniform_grid(2_000);
        let adj = adjust_pvalues(&raw, &fz, zeta);
        for (i, &a) in adj.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&a));
            for (k, &b) in adj.iter().enumerate() {
                if raw[i] <= raw[k] {
                    prop_assert!(a <= b);
                }
            }
        }
        let more = adjust_pvalues(&raw, &fz, zeta + 0.01);
        prop_assert!(adj.iter().zip(&more).all(|(a, b)| a <= b));
    }

    #[test]
    fn holm_is_monotone_bounded_and_dominates_raw(
        raw in prop::collection::vec(0.0f64..=1.0, 1..40),
    ) {
        let adj = bonferroni_holm(&raw);
        let m = raw.len() as f64;
        for (i, &a) in adj.iter().enumerate() {
            prop_assert!(a >= raw[i] && a <= 1.0);
            prop_assert!(a <= (m * raw[i]).min(1.0) + 1e-15);
            for (k, &b) in adj.iter().enumerate() {
                if raw[i] <= raw[k] {
                    prop_assert!(a <= b);
                }
            }
        }
    }
}
