//! Familywise error control by simulating the joint null of the standardized
//! statistics (a Westfall–Young style min-p adjustment), plus Bonferroni–Holm
//! as a baseline.

use serde::{Deserialize, Serialize};

use crate::design::{DesignContext, RidgeCovariance};
use crate::inference::{GroupHypothesis, MonteCarloConfig};
use crate::normal::two_sided_pvalue;
use crate::null_draws::NullSampler;
use crate::seeding::Domain;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    Individual,
    Group,
}

/// Sorted Monte Carlo sample of the minimum null p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub sorted_min_pvalues: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
    pub kind: NullKind,
}

impl NullDistribution {
    fn from_unsorted(mut values: Vec<f64>, seed: u64, kind: NullKind) -> Self {
        values.sort_by(f64::total_cmp);
        NullDistribution {
            draws: values.len(),
            sorted_min_pvalues: values,
            seed,
            kind,
        }
    }

    /// Empirical `F(c) = #{draws ≤ c} / B`.
    pub fn cdf(&self, c: f64) -> f64 {
        let count = self.sorted_min_pvalues.partition_point(|&v| v <= c);
        count as f64 / self.draws as f64
    }
}

/// Simulate `F_Z(c) = P[min_j 2(1 − Φ(a_j|Z_j|)) ≤ c]`.
pub fn simulate_fz(
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    mc: &MonteCarloConfig,
) -> Result<NullDistribution> {
    mc.validate()?;
    let testable: Vec<usize> = (0..ctx.p())
        .filter(|&j| ctx.is_testable(j) && cov.omega_diag[j] > 0.0)
        .collect();
    let sampler = NullSampler::new(ctx, cov, Some(&testable));
    let mins = sampler.map_draws(mc.seed, Domain::NullDraws, mc.draws, |z| {
        let max = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        two_sided_pvalue(max)
    });
    Ok(NullDistribution::from_unsorted(mins, mc.seed, NullKind::Individual))
}

/// `P_corr;j = F̂_Z(P_j + ζ)`, clipped to `[0, 1]`.
pub fn adjust_pvalues(raw: &[f64], fz: &NullDistribution, zeta: f64) -> Vec<f64> {
    raw.iter()
        .map(|&p| fz.cdf(p + zeta).clamp(0.0, 1.0))
        .collect()
}

/// Null distribution of `min_i (1 − J_{G_i}(γ_{G_i,Z}))` for a family of group
/// hypotheses, with `γ_{G,Z} = max_{j∈G} a_j|Z_j|`.
///
/// `J_G` (which includes the offsets `Δ`) is estimated from the same ensemble
/// of `B` draws by ranking: `1 − Ĵ_G(c) = #{b : max_{j∈G}(a_j|Z_j^b| + Δ_j) ≥ c} / B`.
pub fn simulate_group_fz(
    groups: &[GroupHypothesis],
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    delta: &[f64],
    mc: &MonteCarloConfig,
) -> Result<NullDistribution> {
    if groups.is_empty() {
        return Err(Error::InvalidArgument("empty list of group hypotheses".into()));
    }
    mc.validate()?;
    if delta.len() != ctx.p() {
        return Err(Error::DimensionMismatch(format!(
            "delta has {} entries, expected {}",
            delta.len(),
            ctx.p()
        )));
    }
    for g in groups {
        g.validate(ctx.p())?;
    }

    // Union of group members, each group addressed by local positions.
    let mut local = vec![usize::MAX; ctx.p()];
    let mut columns = Vec::new();
    for g in groups {
        for &j in &g.indices {
            if local[j] == usize::MAX {
                local[j] = columns.len();
                columns.push(j);
            }
        }
    }
    let members: Vec<Vec<(usize, f64)>> = groups
        .iter()
        .map(|g| {
            g.indices
                .iter()
                .filter(|&&j| ctx.is_testable(j) && cov.omega_diag[j] > 0.0)
                .map(|&j| (local[j], delta[j]))
                .collect()
        })
        .collect();

    let sampler = NullSampler::new(ctx, cov, Some(&columns));
    // Per draw: for each group, (statistic without Δ, statistic with Δ).
    let per_draw: Vec<Vec<(f64, f64)>> =
        sampler.map_draws(mc.seed, Domain::GroupAdjust, mc.draws, |z| {
            members
                .iter()
                .map(|mem| {
                    mem.iter().fold((0.0f64, 0.0f64), |(plain, shifted), &(i, d)| {
                        let a = z[i].abs();
                        (plain.max(a), shifted.max(a + d))
                    })
                })
                .collect()
        });

    let b = mc.draws;
    let mut minima = vec![f64::INFINITY; b];
    for gi in 0..groups.len() {
        let mut shifted: Vec<f64> = per_draw.iter().map(|d| d[gi].1).collect();
        shifted.sort_by(f64::total_cmp);
        for (draw, m) in per_draw.iter().zip(minima.iter_mut()) {
            let c = draw[gi].0;
            let at_least = b - shifted.partition_point(|&v| v < c);
            *m = m.min(at_least as f64 / b as f64);
        }
    }
    Ok(NullDistribution::from_unsorted(minima, mc.seed, NullKind::Group))
}

/// `P_corr;G_i = F̂_{G,Z}(P_{G_i} + ζ)`.
pub fn adjust_group_pvalues(
    raw_groups: &[f64],
    groups: &[GroupHypothesis],
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    delta: &[f64],
    mc: &MonteCarloConfig,
    zeta: f64,
) -> Result<Vec<f64>> {
    if raw_groups.len() != groups.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} group p-values for {} groups",
            raw_groups.len(),
            groups.len()
        )));
    }
    let fz = simulate_group_fz(groups, ctx, cov, delta, mc)?;
    Ok(adjust_pvalues(raw_groups, &fz, zeta))
}

/// Holm's step-down adjustment.
pub fn bonferroni_holm(raw: &[f64]) -> Vec<f64> {
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let candidate = ((m - rank) as f64 * raw[i]).min(1.0);
        running = running.max(candidate);
        adjusted[i] = running;
    }
    adjusted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(values: Vec<f64>) -> NullDistribution {
        NullDistribution::from_unsorted(values, 0, NullKind::Individual)
    }

    #[test]
    fn cdf_uses_weak_inequality() {
        let d = dist(vec![0.5, 0.1, 0.3, 0.3]);
        assert_eq!(d.sorted_min_pvalues, vec![0.1, 0.3, 0.3, 0.5]);
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(0.3), 0.75);
        assert_eq!(d.cdf(1.0), 1.0);
    }

    #[test]
    fn adjustment_edge_cases() {
        let d = dist((1..=1000).map(|k| k as f64 / 1000.0).collect());
        assert_eq!(adjust_pvalues(&[1.0], &d, 0.0), vec![1.0]);
        let adj = adjust_pvalues(&[0.2, 0.05, 0.9, 0.05], &d, 0.0);
        assert_eq!(adj[1], adj[3]);
        assert!(adj[1] <= adj[0] && adj[0] <= adj[2]);
        let shifted = adjust_pvalues(&[0.2], &d, 0.01);
        assert!(shifted[0] >= adj[0]);
        assert_eq!(adjust_pvalues(&[0.995], &d, 0.5), vec![1.0]);
    }

    #[test]
    fn holm_examples() {
        assert_eq!(bonferroni_holm(&[0.3]), vec![0.3]);
        let tie = bonferroni_holm(&[0.1, 0.1, 0.1, 0.1]);
        assert!(tie.iter().all(|&v| (v - 0.4).abs() < 1e-15));
        let tie = bonferroni_holm(&[0.4, 0.4, 0.4]);
        assert!(tie.iter().all(|&v| v == 1.0));
        let adj = bonferroni_holm(&[0.001, 0.02, 0.9]);
        let expect = [0.003, 0.04, 0.9];
        for (a, e) in adj.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
        // step-down monotonicity
        let adj = bonferroni_holm(&[0.04, 0.01, 0.03]);
        assert!((adj[1] - 0.03).abs() < 1e-15);
        assert!((adj[2] - 0.06).abs() < 1e-15);
        assert!((adj[0] - 0.06).abs() < 1e-15);
    }
}
