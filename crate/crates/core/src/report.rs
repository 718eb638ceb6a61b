//! End-to-end testing on user data and design diagnostics, producing
//! serializable reports.
//!
//! Coefficient estimates are reported on the original covariate scale
//! (`beta_corr`) and on the standardized scale (`beta_corr_std`); statistics,
//! bounds and p-values always refer to the standardized scale. Indices are
//! 1-based.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::{
    build_design, detection_bound, kappa_diagnostics, ridge_covariance, DetectionMode,
};
use crate::inference::{
    corrected_fit, default_ridge_lambda, group_pvalue, group_statistic, single_pvalues,
    GroupHypothesis, MonteCarloConfig, DEFAULT_XI,
};
use crate::lasso::{default_lambda0, scaled_lasso_fit};
use crate::multiplicity::{adjust_group_pvalues, adjust_pvalues, bonferroni_holm, simulate_fz};
use crate::stats::FiveNumber;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub alpha: f64,
    /// `None` means `1/n`.
    pub ridge_lambda: Option<f64>,
    /// `None` means `2 √(log p / n)`.
    pub lambda0: Option<f64>,
    pub xi: f64,
    pub zeta: f64,
    pub mc_draws: usize,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: 0.05,
            ridge_lambda: None,
            lambda0: None,
            xi: DEFAULT_XI,
            zeta: 0.0,
            mc_draws: 10_000,
            seed: 0,
        }
    }
}

/// Configuration with every default resolved, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub alpha: f64,
    pub ridge_lambda: f64,
    pub lambda0: f64,
    pub xi: f64,
    pub zeta: f64,
    pub mc_draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub index: usize,
    pub beta_corr: f64,
    pub beta_corr_std: f64,
    pub statistic: f64,
    pub delta: f64,
    pub pvalue: f64,
    pub adjusted_pvalue: f64,
    pub holm_pvalue: f64,
    /// Rejection at `alpha` with the FWER-adjusted p-value.
    pub reject: bool,
    pub testable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub label: String,
    pub size: usize,
    pub statistic: f64,
    pub pvalue: f64,
    pub adjusted_pvalue: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub p: usize,
    pub rank: usize,
    pub sigma_hat: f64,
    pub config: ResolvedConfig,
    pub coefficients: Vec<CoefficientRecord>,
    pub groups: Vec<GroupRecord>,
    pub warnings: Vec<String>,
}

/// Scaled Lasso, corrected Ridge, single and group p-values, and FWER
/// adjustment. Groups use 0-based indices.
pub fn run_test(
    x: &DMatrix<f64>,
    y: &[f64],
    groups: &[GroupHypothesis],
    cfg: &TestConfig,
) -> Result<TestReport> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(crate::Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {}",
            cfg.alpha
        )));
    }
    if cfg.zeta.is_nan() || cfg.zeta < 0.0 {
        return Err(crate::Error::InvalidArgument(format!(
            "zeta must be nonnegative, got {}",
            cfg.zeta
        )));
    }
    let ctx = build_design(x, true)?;
    let (n, p) = (ctx.n(), ctx.p());
    if y.len() != n {
        return Err(crate::Error::DimensionMismatch(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    for g in groups {
        g.validate(p)?;
    }
    let resolved = ResolvedConfig {
        alpha: cfg.alpha,
        ridge_lambda: cfg.ridge_lambda.unwrap_or_else(|| default_ridge_lambda(n)),
        lambda0: cfg.lambda0.unwrap_or_else(|| default_lambda0(n, p)),
        xi: cfg.xi,
        zeta: cfg.zeta,
        mc_draws: cfg.mc_draws,
        seed: cfg.seed,
    };
    let mc = MonteCarloConfig {
        draws: cfg.mc_draws,
        seed: cfg.seed,
    };
    mc.validate()?;

    let cov = ridge_covariance(&ctx, resolved.ridge_lambda)?;
    let init = scaled_lasso_fit(&ctx, y, resolved.lambda0)?;
    let fit = corrected_fit(&ctx, &cov, &init, y, resolved.xi)?;
    let raw = single_pvalues(&fit);
    let fz = simulate_fz(&ctx, &cov, &mc)?;
    let adjusted = adjust_pvalues(&raw, &fz, resolved.zeta);
    let holm = bonferroni_holm(&raw);

    let mut warnings = Vec::new();
    if !init.converged {
        warnings.push(format!(
            "scaled lasso stopped after {} iterations without converging",
            init.iterations
        ));
    }
    let untestable: Vec<usize> = fit.untestable().map(|j| j + 1).collect();
    if !untestable.is_empty() {
        warnings.push(format!(
            "untestable coefficients (constant column or zero projection): {untestable:?}"
        ));
    }
    if cov.omega_min <= 0.0 {
        warnings.push("minimum Ridge variance is zero for some coefficient".into());
    }

    let coefficients = (0..p)
        .map(|j| CoefficientRecord {
            index: j + 1,
            beta_corr: fit.beta_corr[j] / ctx.col_scales()[j],
            beta_corr_std: fit.beta_corr[j],
            statistic: fit.stats[j],
            delta: fit.delta[j],
            pvalue: raw[j],
            adjusted_pvalue: adjusted[j],
            holm_pvalue: holm[j],
            reject: adjusted[j] <= cfg.alpha,
            testable: fit.testable[j],
        })
        .collect();

    let mut group_records = Vec::new();
    if !groups.is_empty() {
        let raw_groups = groups
            .iter()
            .map(|g| group_pvalue(&fit, &cov, &ctx, g, &mc))
            .collect::<Result<Vec<f64>>>()?;
        let adj_groups =
            adjust_group_pvalues(&raw_groups, groups, &ctx, &cov, &fit.delta, &mc, resolved.zeta)?;
        for (i, g) in groups.iter().enumerate() {
            group_records.push(GroupRecord {
                label: g.label.clone(),
                size: g.indices.len(),
                statistic: group_statistic(&fit, g),
                pvalue: raw_groups[i],
                adjusted_pvalue: adj_groups[i],
                reject: adj_groups[i] <= cfg.alpha,
            });
        }
    }

    Ok(TestReport {
        n,
        p,
        rank: ctx.rank(),
        sigma_hat: init.sigma_hat,
        config: resolved,
        coefficients,
        groups: group_records,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDiagnostics {
    pub index: usize,
    pub projection_diag: f64,
    pub max_offdiag: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Unit-constant detection scales at the given `sigma` and `s0`.
    pub detection_single: f64,
    pub detection_multiple: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    pub n: usize,
    pub p: usize,
    pub rank: usize,
    pub lambda_min_nonzero: f64,
    pub ridge_lambda: f64,
    pub omega_min: f64,
    pub kappa: Option<FiveNumber>,
    /// `min_j Ω_jj > 0`.
    pub min_variance_condition: bool,
    pub constant_columns: Vec<usize>,
    pub sigma: f64,
    pub s0_bound: usize,
    pub coefficients: Vec<CoefficientDiagnostics>,
}

pub fn design_diagnostics(
    x: &DMatrix<f64>,
    ridge_lambda: Option<f64>,
    sigma: f64,
    s0_bound: usize,
) -> Result<DesignDiagnostics> {
    let ctx = build_design(x, true)?;
    let lambda = ridge_lambda.unwrap_or_else(|| default_ridge_lambda(ctx.n()));
    let cov = ridge_covariance(&ctx, lambda)?;
    let kd = kappa_diagnostics(&ctx);
    let single = detection_bound(&ctx, &cov, sigma, s0_bound, DetectionMode::Single)?;
    let multiple = detection_bound(&ctx, &cov, sigma, s0_bound, DetectionMode::Multiple)?;
    let offdiag = ctx.max_offdiag_abs();
    let coefficients = (0..ctx.p())
        .map(|j| CoefficientDiagnostics {
            index: j + 1,
            projection_diag: ctx.projection_diag(j),
            max_offdiag: offdiag[j],
            kappa: kd.kappa[j],
            omega: cov.omega_diag[j],
            detection_single: single[j],
            detection_multiple: multiple[j],
        })
        .collect();
    Ok(DesignDiagnostics {
        n: ctx.n(),
        p: ctx.p(),
        rank: ctx.rank(),
        lambda_min_nonzero: ctx.lambda_min_nonzero(),
        ridge_lambda: lambda,
        omega_min: cov.omega_min,
        kappa: kd.summary,
        min_variance_condition: cov.omega_min > 0.0,
        constant_columns: ctx
            .constant_columns()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(j, _)| j + 1)
            .collect(),
        sigma,
        s0_bound,
        coefficients,
    })
}
