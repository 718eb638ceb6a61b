//! Synthetic experiments: independent (M1) and equicorrelated (M2) Gaussian
//! designs with a fixed design per scenario, replicated noise, and aggregated
//! error/power metrics.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::{build_design, ridge_covariance, DesignContext, RidgeCovariance};
use crate::inference::{
    corrected_fit, default_ridge_lambda, single_pvalues, GroupHypothesis, GroupNullDraws,
    MonteCarloConfig, DEFAULT_XI,
};
use crate::lasso::{default_lambda0, scaled_lasso_fit, InitialFit};
use crate::multiplicity::{adjust_pvalues, simulate_fz, NullDistribution};
use crate::par;
use crate::seeding::{substream, Domain};
use crate::stats::Histogram;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Rows i.i.d. `N_p(0, I)`.
    M1,
    /// Rows i.i.d. `N_p(0, Σ)` with `Σ_jk = ρ` off the diagonal.
    M2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    /// Active set is the first `s0` coefficients.
    pub s0: usize,
    pub b: f64,
    pub rho: f64,
    pub sigma: f64,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mc_draws: usize,
    /// Test `{1..g}` and the null group `{p−g+1..p}` when set.
    pub group_size: Option<usize>,
    pub xi: f64,
    pub zeta: f64,
    /// Defaults to `1/n`.
    pub ridge_lambda: Option<f64>,
    /// Defaults to `2 √(log p / n)`.
    pub lambda0: Option<f64>,
}

impl ScenarioConfig {
    /// Defaults: `ρ = 0` (M1) or `0.8` (M2), `σ = 1`, `α = 0.05`, 500
    /// replicates, 10 000 Monte Carlo draws.
    pub fn new(model: Model, n: usize, p: usize, s0: usize, b: f64) -> Self {
        ScenarioConfig {
            model,
            n,
            p,
            s0,
            b,
            rho: match model {
                Model::M1 => 0.0,
                Model::M2 => 0.8,
            },
            sigma: 1.0,
            reps: 500,
            alpha: 0.05,
            seed: 0,
            mc_draws: 10_000,
            group_size: None,
            xi: DEFAULT_XI,
            zeta: 0.0,
            ridge_lambda: None,
            lambda0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 2 || self.p < 1 {
            return bad(format!("need n >= 2 and p >= 1, got n={} p={}", self.n, self.p));
        }
        if self.s0 > self.p {
            return bad(format!("s0 = {} exceeds p = {}", self.s0, self.p));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad(format!("coefficient size b must be positive, got {}", self.b));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if self.model == Model::M1 && self.rho != 0.0 {
            return bad("model m1 has independent covariates; use m2 for rho > 0".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.reps < 1 {
            return bad("need at least one replicate".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.mc_draws < MonteCarloConfig::MIN_DRAWS {
            return bad(format!(
                "need at least {} Monte Carlo draws, got {}",
                MonteCarloConfig::MIN_DRAWS,
                self.mc_draws
            ));
        }
        if let Some(g) = self.group_size {
            if g == 0 || g > self.p || self.p - g < self.s0 {
                return bad(format!(
                    "group size {g} must be positive and leave the last {g} covariates inactive"
                ));
            }
        }
        if !(self.xi > 0.0 && self.xi < 0.5) {
            return bad(format!("xi must lie in (0, 0.5), got {}", self.xi));
        }
        if self.zeta.is_nan() || self.zeta < 0.0 {
            return bad(format!("zeta must be nonnegative, got {}", self.zeta));
        }
        Ok(())
    }

    /// `β⁰` on the raw design scale.
    pub fn beta0(&self) -> Vec<f64> {
        let mut beta = vec![0.0; self.p];
        beta[..self.s0].fill(self.b);
        beta
    }
}

/// `n × p` matrix whose rows are i.i.d. `N_p(0, Σ)` with `Σ_jk = ρ + (1−ρ)1[j=k]`,
/// sampled as `√ρ g_i + √(1−ρ) h_ij` from one shared and `p` own factors.
pub fn equicorrelated_matrix(n: usize, p: usize, rho: f64, seed: u64) -> DMatrix<f64> {
    let (shared, own) = (rho.sqrt(), (1.0 - rho).sqrt());
    let rows: Vec<Vec<f64>> = par::map_range(n, |i| {
        let mut rng = substream(seed, Domain::Design, i as u64);
        let g: f64 = StandardNormal.sample(&mut rng);
        (0..p)
            .map(|_| {
                let h: f64 = StandardNormal.sample(&mut rng);
                shared * g + own * h
            })
            .collect()
    });
    DMatrix::from_fn(n, p, |i, j| rows[i][j])
}

/// Matrix of i.i.d. standard normals.
pub fn standard_gaussian_matrix(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    equicorrelated_matrix(n, p, 0.0, seed)
}

/// The fixed design of a scenario.
pub fn generate_design(cfg: &ScenarioConfig, seed: u64) -> DMatrix<f64> {
    equicorrelated_matrix(cfg.n, cfg.p, cfg.rho, seed)
}

/// `‖X β⁰‖₂ / (√n σ)`.
pub fn signal_to_noise(x: &DMatrix<f64>, beta0: &[f64], sigma: f64) -> f64 {
    let signal = x * DVector::from_column_slice(beta0);
    signal.norm() / ((x.nrows() as f64).sqrt() * sigma)
}

/// Standardized residual projection bias
/// `a_{n,p;j}(σ) Σ_{k≠j} (P_X)_{jk} (β̂_init;k − β⁰_k)` for every testable `j`.
/// Both coefficient vectors are on the standardized scale.
pub fn projection_bias(
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    beta_init: &[f64],
    beta0_std: &[f64],
    sigma: f64,
) -> Vec<f64> {
    let diff: Vec<f64> = beta_init.iter().zip(beta0_std).map(|(a, b)| a - b).collect();
    let projected = ctx.project(&diff);
    (0..ctx.p())
        .filter(|&j| ctx.is_testable(j) && cov.omega_diag[j] > 0.0)
        .map(|j| {
            let off = projected[j] - ctx.projection_diag(j) * diff[j];
            cov.a_factor(ctx.n(), sigma, j) * off
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    /// `None` for failed replicates.
    pub sigma_hat: Option<f64>,
    /// Rejections among inactive / active coefficients with raw p-values.
    pub false_single: usize,
    pub true_single: usize,
    /// Same with FWER-adjusted p-values; `false_multiple` is `V_α`.
    pub false_multiple: usize,
    pub true_multiple: usize,
    pub group_active_pvalue: Option<f64>,
    pub group_null_pvalue: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: ScenarioConfig,
    pub rank: usize,
    pub snr: f64,
    /// Replicates that completed; metrics are averaged over these.
    pub completed_reps: usize,
    pub failed_reps: usize,
    pub sigma_hat_mean: f64,
    /// Mean over inactive coefficients of the raw-p-value rejection rate.
    pub avg_type1: f64,
    /// Mean over active coefficients of the raw-p-value rejection rate.
    pub avg_power: Option<f64>,
    /// `P[V_α > 0]` with FWER-adjusted p-values.
    pub fwer: f64,
    pub avg_power_multiple: Option<f64>,
    /// `v_distribution[k]` = replicates with exactly `k` false positives.
    pub v_distribution: Vec<usize>,
    /// Rejection rate of the null group `{p−g+1..p}`.
    pub group_type1: Option<f64>,
    /// Rejection rate of `{1..g}` (only when it contains active coefficients).
    pub group_power: Option<f64>,
    pub replicates: Vec<ReplicateRecord>,
}

/// Everything about a scenario that is fixed across replicates.
struct PreparedScenario {
    cfg: ScenarioConfig,
    x: DMatrix<f64>,
    ctx: DesignContext,
    cov: RidgeCovariance,
    signal: Vec<f64>,
    lambda0: f64,
}

impl PreparedScenario {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let x = generate_design(cfg, cfg.seed);
        let ctx = build_design(&x, true)?;
        let lambda = cfg.ridge_lambda.unwrap_or_else(|| default_ridge_lambda(cfg.n));
        let cov = ridge_covariance(&ctx, lambda)?;
        let signal: Vec<f64> = (&x * DVector::from_vec(cfg.beta0())).iter().copied().collect();
        let lambda0 = cfg.lambda0.unwrap_or_else(|| default_lambda0(cfg.n, cfg.p));
        Ok(PreparedScenario {
            cfg: cfg.clone(),
            x,
            ctx,
            cov,
            signal,
            lambda0,
        })
    }

    fn response(&self, rep: usize) -> Vec<f64> {
        let mut rng = substream(self.cfg.seed, Domain::Noise, rep as u64);
        self.signal
            .iter()
            .map(|s| {
                let e: f64 = StandardNormal.sample(&mut rng);
                s + self.cfg.sigma * e
            })
            .collect()
    }

    fn initial_fit(&self, y: &[f64]) -> Result<InitialFit> {
        scaled_lasso_fit(&self.ctx, y, self.lambda0)
    }

    fn beta0_std(&self) -> Vec<f64> {
        self.cfg
            .beta0()
            .iter()
            .zip(self.ctx.col_scales())
            .map(|(b, s)| b * s)
            .collect()
    }
}

struct GroupPair {
    active: GroupNullDraws,
    null: GroupNullDraws,
}

fn run_replicate(
    sc: &PreparedScenario,
    fz: &NullDistribution,
    groups: Option<&GroupPair>,
    rep: usize,
) -> Result<ReplicateRecord> {
    let cfg = &sc.cfg;
    let y = sc.response(rep);
    let init = sc.initial_fit(&y)?;
    let fit = corrected_fit(&sc.ctx, &sc.cov, &init, &y, cfg.xi)?;
    let raw = single_pvalues(&fit);
    let adjusted = adjust_pvalues(&raw, fz, cfg.zeta);
    let count = |v: &[f64], active: bool| {
        v.iter()
            .enumerate()
            .filter(|&(j, &pv)| (j < cfg.s0) == active && pv <= cfg.alpha)
            .count()
    };
    Ok(ReplicateRecord {
        index: rep,
        sigma_hat: Some(init.sigma_hat),
        false_single: count(&raw, false),
        true_single: count(&raw, true),
        false_multiple: count(&adjusted, false),
        true_multiple: count(&adjusted, true),
        group_active_pvalue: groups.map(|g| g.active.pvalue(&fit)),
        group_null_pvalue: groups.map(|g| g.null.pvalue(&fit)),
        error: None,
    })
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimulationReport> {
    let sc = PreparedScenario::new(cfg)?;
    let mc = MonteCarloConfig {
        draws: cfg.mc_draws,
        seed: cfg.seed,
    };
    let fz = simulate_fz(&sc.ctx, &sc.cov, &mc)?;
    let groups = match cfg.group_size {
        Some(g) => {
            let active = GroupHypothesis::new("first", (0..g).collect(), cfg.p)?;
            let null = GroupHypothesis::new("last", (cfg.p - g..cfg.p).collect(), cfg.p)?;
            Some(GroupPair {
                active: GroupNullDraws::simulate(&sc.ctx, &sc.cov, &active, &mc)?,
                null: GroupNullDraws::simulate(&sc.ctx, &sc.cov, &null, &mc)?,
            })
        }
        None => None,
    };

    let records: Vec<ReplicateRecord> = par::map_range(cfg.reps, |rep| {
        run_replicate(&sc, &fz, groups.as_ref(), rep).unwrap_or_else(|e| ReplicateRecord {
            index: rep,
            sigma_hat: None,
            false_single: 0,
            true_single: 0,
            false_multiple: 0,
            true_multiple: 0,
            group_active_pvalue: None,
            group_null_pvalue: None,
            error: Some(e.to_string()),
        })
    });

    let failed: Vec<&ReplicateRecord> = records.iter().filter(|r| r.error.is_some()).collect();
    if failed.len() * 100 > cfg.reps {
        return Err(Error::ScenarioFailed {
            failed: failed.len(),
            reps: cfg.reps,
            first: failed[0].error.clone().unwrap_or_default(),
        });
    }
    let ok: Vec<&ReplicateRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let done = ok.len() as f64;
    let inactive = (cfg.p - cfg.s0) as f64;
    let active = cfg.s0 as f64;

    let sum = |f: &dyn Fn(&ReplicateRecord) -> usize| ok.iter().map(|r| f(r)).sum::<usize>() as f64;
    let avg_type1 = if inactive > 0.0 {
        sum(&|r| r.false_single) / (done * inactive)
    } else {
        0.0
    };
    let avg_power = (cfg.s0 > 0).then(|| sum(&|r| r.true_single) / (done * active));
    let avg_power_multiple = (cfg.s0 > 0).then(|| sum(&|r| r.true_multiple) / (done * active));

    let max_v = ok.iter().map(|r| r.false_multiple).max().unwrap_or(0);
    let mut v_distribution = vec![0usize; max_v + 1];
    for r in &ok {
        v_distribution[r.false_multiple] += 1;
    }
    let fwer = 1.0 - v_distribution[0] as f64 / done;

    let rate = |f: &dyn Fn(&ReplicateRecord) -> Option<f64>| {
        ok.iter()
            .filter(|r| f(r).is_some_and(|pv| pv <= cfg.alpha))
            .count() as f64
            / done
    };
    let group_type1 = cfg.group_size.map(|_| rate(&|r| r.group_null_pvalue));
    let group_power = cfg
        .group_size
        .filter(|_| cfg.s0 > 0)
        .map(|_| rate(&|r| r.group_active_pvalue));

    Ok(SimulationReport {
        config: cfg.clone(),
        rank: sc.ctx.rank(),
        snr: signal_to_noise(&sc.x, &cfg.beta0(), cfg.sigma),
        completed_reps: ok.len(),
        failed_reps: failed.len(),
        sigma_hat_mean: ok.iter().filter_map(|r| r.sigma_hat).sum::<f64>() / done,
        avg_type1,
        avg_power,
        fwer,
        avg_power_multiple,
        v_distribution,
        group_type1,
        group_power,
        replicates: records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBiasReport {
    pub histogram: Histogram,
    /// Number of pooled values (testable coefficients × replicates).
    pub values: usize,
    /// Share of values in `[−10, 10]`.
    pub fraction_within_10: f64,
}

impl ProjectionBiasReport {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        let within = values.iter().filter(|v| v.abs() <= 10.0).count();
        ProjectionBiasReport {
            histogram: Histogram::from_values(values, bins),
            values: values.len(),
            fraction_within_10: within as f64 / values.len().max(1) as f64,
        }
    }
}

/// Pools the standardized projection bias (with the true `σ`) over all
/// coefficients and replicates.
pub fn projection_bias_histogram(cfg: &ScenarioConfig, bins: usize) -> Result<ProjectionBiasReport> {
    let sc = PreparedScenario::new(cfg)?;
    let beta0_std = sc.beta0_std();
    let per_rep: Vec<Result<Vec<f64>>> = par::map_range(cfg.reps, |rep| {
        let y = sc.response(rep);
        let init = sc.initial_fit(&y)?;
        Ok(projection_bias(&sc.ctx, &sc.cov, &init.beta_init, &beta0_std, cfg.sigma))
    });
    let mut values = Vec::new();
    for r in per_rep {
        values.extend(r?);
    }
    Ok(ProjectionBiasReport::from_values(&values, bins))
}
