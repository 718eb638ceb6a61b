//! Bias-corrected Ridge statistics, their bias bounds and p-values.

use serde::{Deserialize, Serialize};

use crate::design::{ridge_fit_centered, DesignContext, RidgeCovariance};
use crate::lasso::InitialFit;
use crate::normal::two_sided_pvalue;
use crate::null_draws::NullSampler;
use crate::seeding::Domain;
use crate::{Error, Result};

/// Default `ξ` in the bias bound exponent `1/2 − ξ`.
pub const DEFAULT_XI: f64 = 0.05;

/// Default Ridge penalty `1/n`.
pub fn default_ridge_lambda(n: usize) -> f64 {
    1.0 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            draws: 10_000,
            seed: 0,
        }
    }
}

impl MonteCarloConfig {
    pub const MIN_DRAWS: usize = 1000;

    pub(crate) fn validate(&self) -> Result<()> {
        if self.draws < Self::MIN_DRAWS {
            return Err(Error::InvalidArgument(format!(
                "need at least {} Monte Carlo draws, got {}",
                Self::MIN_DRAWS,
                self.draws
            )));
        }
        Ok(())
    }
}

/// `H_{0,G}: β_j = 0 for all j ∈ G`. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupHypothesis {
    pub label: String,
    pub indices: Vec<usize>,
}

impl GroupHypothesis {
    pub fn new(label: impl Into<String>, indices: Vec<usize>, p: usize) -> Result<Self> {
        let g = GroupHypothesis {
            label: label.into(),
            indices,
        };
        g.validate(p)?;
        Ok(g)
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let mut seen = vec![false; p];
        for &j in &self.indices {
            if j >= p {
                return Err(Error::InvalidArgument(format!(
                    "group '{}' index {} out of range for p = {p}",
                    self.label,
                    j + 1
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidArgument(format!(
                    "group '{}' repeats index {}",
                    self.label,
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectedRidgeFit {
    pub lambda: f64,
    pub beta_ridge: Vec<f64>,
    /// `β̂_j − Σ_{k≠j} (P_X)_{jk} β̂_init;k`.
    pub beta_corr: Vec<f64>,
    /// `a_{n,p;j}(σ̂) |β̂_corr;j|`.
    pub stats: Vec<f64>,
    /// `Δ_j = max_{k≠j} |a_{n,p;j}(σ̂) (P_X)_{jk}| (log p / n)^{1/2 − ξ}`.
    pub delta: Vec<f64>,
    pub xi: f64,
    pub sigma_used: f64,
    /// `a_{n,p;j}(σ̂)`; zero for untestable coefficients.
    pub a_factors: Vec<f64>,
    pub testable: Vec<bool>,
}

impl CorrectedRidgeFit {
    pub fn untestable(&self) -> impl Iterator<Item = usize> + '_ {
        self.testable.iter().enumerate().filter(|(_, &t)| !t).map(|(j, _)| j)
    }
}

/// Correct the Ridge fit at `cov.lambda` for projection bias using the
/// initial estimator.
pub fn corrected_fit(
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    init: &InitialFit,
    y: &[f64],
    xi: f64,
) -> Result<CorrectedRidgeFit> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::InvalidArgument(format!("xi must lie in (0, 0.5), got {xi}")));
    }
    let p = ctx.p();
    if init.beta_init.len() != p || cov.omega_diag.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "initial fit has {} coefficients, covariance {}, design {p}",
            init.beta_init.len(),
            cov.omega_diag.len()
        )));
    }
    let sigma = init.sigma_hat;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::DegenerateNoise(sigma));
    }
    let (yc, _) = ctx.center_response(y)?;
    let beta_ridge = ridge_fit_centered(ctx, &yc, cov.lambda);

    let projected = ctx.project(&init.beta_init);
    let offdiag = ctx.max_offdiag_abs();
    let rate = ((p as f64).ln() / ctx.n() as f64).powf(0.5 - xi);

    let mut beta_corr = vec![0.0; p];
    let mut stats = vec![0.0; p];
    let mut delta = vec![0.0; p];
    let mut a_factors = vec![0.0; p];
    let mut testable = vec![false; p];
    for j in 0..p {
        let pjj = ctx.projection_diag(j);
        let bias_hat = projected[j] - pjj * init.beta_init[j];
        beta_corr[j] = beta_ridge[j] - bias_hat;
        if !ctx.is_testable(j) || cov.omega_diag[j] <= 0.0 {
            continue;
        }
        testable[j] = true;
        let a = cov.a_factor(ctx.n(), sigma, j);
        a_factors[j] = a;
        stats[j] = a * beta_corr[j].abs();
        delta[j] = a * offdiag[j] * rate;
    }

    Ok(CorrectedRidgeFit {
        lambda: cov.lambda,
        beta_ridge,
        beta_corr,
        stats,
        delta,
        xi,
        sigma_used: sigma,
        a_factors,
        testable,
    })
}

/// `P_j = 2(1 − Φ((stat_j − Δ_j)₊))`; untestable coefficients get 1.
pub fn single_pvalues(fit: &CorrectedRidgeFit) -> Vec<f64> {
    fit.stats
        .iter()
        .zip(&fit.delta)
        .zip(&fit.testable)
        .map(|((&s, &d), &t)| if t { two_sided_pvalue((s - d).max(0.0)) } else { 1.0 })
        .collect()
}

/// `γ̂_G = max_{j∈G} stat_j` over the testable members (0 if none).
pub fn group_statistic(fit: &CorrectedRidgeFit, group: &GroupHypothesis) -> f64 {
    group
        .indices
        .iter()
        .filter(|&&j| fit.testable[j])
        .map(|&j| fit.stats[j])
        .fold(0.0, f64::max)
}

/// Monte Carlo ensemble of `(a_j |Z_j|)_{j∈G}` kept in memory so that the same
/// null draws can be reused with different `Δ` vectors.
#[derive(Debug, Clone)]
pub struct GroupNullDraws {
    indices: Vec<usize>,
    /// Draw-major, `draws × |G|`.
    values: Vec<f64>,
    draws: usize,
}

impl GroupNullDraws {
    pub fn simulate(
        ctx: &DesignContext,
        cov: &RidgeCovariance,
        group: &GroupHypothesis,
        mc: &MonteCarloConfig,
    ) -> Result<Self> {
        group.validate(ctx.p())?;
        mc.validate()?;
        let sampler = NullSampler::new(ctx, cov, Some(&group.indices));
        let values: Vec<f64> = sampler
            .map_draws(mc.seed, Domain::GroupDraws, mc.draws, |z| {
                z.iter().map(|v| v.abs()).collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        Ok(GroupNullDraws {
            indices: group.indices.clone(),
            values,
            draws: mc.draws,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    /// `(1 + #{b : max_{j∈G}(a_j|Z_j^b| + Δ_j) ≥ γ̂_G}) / (B + 1)`.
    pub fn pvalue(&self, fit: &CorrectedRidgeFit) -> f64 {
        let gamma = group_statistic(
            fit,
            &GroupHypothesis {
                label: String::new(),
                indices: self.indices.clone(),
            },
        );
        let m = self.indices.len();
        let offsets: Vec<f64> = self.indices.iter().map(|&j| fit.delta[j]).collect();
        let exceed = self
            .values
            .chunks_exact(m)
            .filter(|draw| {
                draw.iter()
                    .zip(&offsets)
                    .map(|(z, d)| z + d)
                    .fold(f64::NEG_INFINITY, f64::max)
                    >= gamma
            })
            .count();
        (1 + exceed) as f64 / (self.draws + 1) as f64
    }
}

/// Group p-value `1 − Ĵ_G(γ̂_G)` with `J_G` simulated from the σ-free null.
pub fn group_pvalue(
    fit: &CorrectedRidgeFit,
    cov: &RidgeCovariance,
    ctx: &DesignContext,
    group: &GroupHypothesis,
    mc: &MonteCarloConfig,
) -> Result<f64> {
    group.validate(ctx.p())?;
    mc.validate()?;
    let gamma = group_statistic(fit, group);
    let offsets: Vec<f64> = group.indices.iter().map(|&j| fit.delta[j]).collect();
    let sampler = NullSampler::new(ctx, cov, Some(&group.indices));
    let exceed = sampler
        .map_draws(mc.seed, Domain::GroupDraws, mc.draws, |z| {
            z.iter()
                .zip(&offsets)
                .map(|(v, d)| v.abs() + d)
                .fold(f64::NEG_INFINITY, f64::max)
                >= gamma
        })
        .into_iter()
        .filter(|&e| e)
        .count();
    Ok((1 + exceed) as f64 / (mc.draws + 1) as f64)
}
