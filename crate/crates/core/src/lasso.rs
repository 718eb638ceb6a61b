//! Lasso by cyclic coordinate descent, and the Scaled Lasso built on top of
//! it.
//!
//! The Lasso objective is `‖y − Xβ‖²/n + λ‖β‖₁`. With the squared loss divided
//! by `n` (not `2n`) the soft-threshold level for a unit-norm column is `λ/2`,
//! so `β̂ = 0` exactly when `λ ≥ max_j |2 n⁻¹ X_jᵀ y|`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::DesignContext;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions {
    /// Stop when the largest coefficient change in a full sweep falls below
    /// `tol` times the response scale `‖y‖₂/√n`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        LassoOptions {
            tol: 1e-7,
            max_sweeps: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoSolution {
    pub coefficients: Vec<f64>,
    /// Residual `y − Xβ̂` of the centered response.
    pub residual: Vec<f64>,
    pub sweeps: usize,
    /// Objective after each sweep (full or active-set).
    pub objective_history: Vec<f64>,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Lasso coefficients on the standardized scale.
pub fn lasso_fit(
    ctx: &DesignContext,
    y: &[f64],
    lambda: f64,
    warm_start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    lasso_fit_with(ctx, y, lambda, warm_start, &LassoOptions::default()).map(|s| s.coefficients)
}

pub fn lasso_fit_with(
    ctx: &DesignContext,
    y: &[f64],
    lambda: f64,
    warm_start: Option<&[f64]>,
    opts: &LassoOptions,
) -> Result<LassoSolution> {
    let (yc, _) = ctx.center_response(y)?;
    lasso_centered(ctx, &yc, lambda, warm_start, opts)
}

/// Active-set step: solve the Lasso restricted to the orthant given by
/// `signs` on `active`, `n⁻¹X_AᵀX_A β_A = n⁻¹X_Aᵀy − (λ/2) s_A`, and move
/// towards that point until the first coefficient reaches zero. The objective
/// agrees with a convex quadratic on the orthant, so it does not increase.
fn sign_fixed_step(
    x: &DMatrix<f64>,
    yc: &[f64],
    half: f64,
    active: &[usize],
    signs: &[bool],
    beta: &mut [f64],
    residual: &mut [f64],
) -> bool {
    let k = active.len();
    if k == 0 || k > x.nrows() {
        return false;
    }
    let nf = x.nrows() as f64;
    let xa = x.select_columns(active);
    let gram = xa.transpose() * &xa / nf;
    let mut rhs = xa.transpose() * DVector::from_column_slice(yc) / nf;
    for (r, &pos) in rhs.iter_mut().zip(signs) {
        *r -= if pos { half } else { -half };
    }
    let Some(chol) = gram.cholesky() else {
        return false;
    };
    let target = chol.solve(&rhs);
    if target.iter().any(|b| !b.is_finite()) {
        return false;
    }
    let current: Vec<f64> = active.iter().map(|&j| beta[j]).collect();
    // Largest step in [0, 1] that keeps every sign; the blocking coordinate
    // lands exactly on zero.
    let mut step = 1.0f64;
    let mut blocking = None;
    for (i, (&b, &t)) in current.iter().zip(target.iter()).enumerate() {
        if (t > 0.0) != signs[i] || t == 0.0 {
            let s = b / (b - t);
            if s < step {
                step = s;
                blocking = Some(i);
            }
        }
    }
    if step <= 0.0 {
        return false;
    }
    let mut next: Vec<f64> = current
        .iter()
        .zip(target.iter())
        .map(|(&b, &t)| b + step * (t - b))
        .collect();
    if let Some(i) = blocking {
        next[i] = 0.0;
    }
    for ((&j, &b), &old) in active.iter().zip(&next).zip(&current) {
        let delta = b - old;
        if delta != 0.0 {
            for (r, xv) in residual.iter_mut().zip(x.column(j).iter()) {
                *r -= delta * xv;
            }
        }
        beta[j] = b;
    }
    true
}

pub(crate) fn lasso_centered(
    ctx: &DesignContext,
    yc: &[f64],
    lambda: f64,
    warm_start: Option<&[f64]>,
    opts: &LassoOptions,
) -> Result<LassoSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lasso lambda must be >= 0, got {lambda}")));
    }
    let (n, p) = (ctx.n(), ctx.p());
    let x = ctx.x_std();
    let nf = n as f64;

    let mut beta = match warm_start {
        Some(w) if w.len() != p => {
            return Err(Error::DimensionMismatch(format!(
                "warm start has {} entries, expected {p}",
                w.len()
            )))
        }
        Some(w) => w.to_vec(),
        None => vec![0.0; p],
    };
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared() / nf).collect();
    let usable: Vec<bool> = (0..p)
        .map(|j| !ctx.constant_columns()[j] && col_sq[j] > 0.0)
        .collect();
    for j in 0..p {
        if !usable[j] {
            beta[j] = 0.0;
        }
    }

    let mut residual = yc.to_vec();
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (r, xv) in residual.iter_mut().zip(x.column(j).iter()) {
                *r -= b * xv;
            }
        }
    }

    let y_scale = (yc.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let tol = opts.tol * y_scale.max(f64::MIN_POSITIVE);
    let half = lambda / 2.0;

    let objective = |beta: &[f64], residual: &[f64]| {
        residual.iter().map(|r| r * r).sum::<f64>() / nf
            + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    };

    // One coordinate pass over `idx`; returns the largest change.
    let sweep = |beta: &mut [f64], residual: &mut [f64], idx: &mut dyn Iterator<Item = usize>| {
        let mut max_change = 0.0f64;
        for j in idx {
            let col = x.column(j);
            let old = beta[j];
            let rho = col.iter().zip(residual.iter()).map(|(a, r)| a * r).sum::<f64>() / nf
                + col_sq[j] * old;
            let new = soft_threshold(rho, half) / col_sq[j];
            let delta = new - old;
            if delta != 0.0 {
                for (r, xv) in residual.iter_mut().zip(col.iter()) {
                    *r -= delta * xv;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    };

    let mut history = vec![objective(&beta, &residual)];
    let mut sweeps = 0usize;
    let mut last_change;
    loop {
        // Full sweep: picks up newly active coordinates and certifies
        // convergence.
        last_change = sweep(&mut beta, &mut residual, &mut (0..p).filter(|&j| usable[j]));
        sweeps += 1;
        history.push(objective(&beta, &residual));
        if last_change < tol {
            break;
        }
        if sweeps >= opts.max_sweeps {
            return Err(Error::LassoNotConverged {
                sweeps,
                max_change: last_change,
                best: beta,
            });
        }
        let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        let mut signs: Vec<bool> = active.iter().map(|&j| beta[j] > 0.0).collect();
        loop {
            let change = sweep(&mut beta, &mut residual, &mut active.iter().copied());
            sweeps += 1;
            history.push(objective(&beta, &residual));
            if change < tol {
                break;
            }
            let now: Vec<bool> = active.iter().map(|&j| beta[j] > 0.0).collect();
            let stable = now == signs;
            signs = now;
            if stable {
                let live: Vec<usize> = active.iter().copied().filter(|&j| beta[j] != 0.0).collect();
                let live_signs: Vec<bool> = live.iter().map(|&j| beta[j] > 0.0).collect();
                if sign_fixed_step(x, yc, half, &live, &live_signs, &mut beta, &mut residual) {
                    history.push(objective(&beta, &residual));
                }
            }
            if sweeps >= opts.max_sweeps {
                return Err(Error::LassoNotConverged {
                    sweeps,
                    max_change: change,
                    best: beta,
                });
            }
        }
    }

    Ok(LassoSolution {
        coefficients: beta,
        residual,
        sweeps,
        objective_history: history,
    })
}

/// Output of the Scaled Lasso.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialFit {
    /// Coefficients on the standardized scale.
    pub beta_init: Vec<f64>,
    pub sigma_hat: f64,
    pub lambda0: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ScaledLassoOptions {
    /// Stop when `|σ̂_new − σ̂_old|` is below this times the response scale.
    pub sigma_tol: f64,
    pub max_iterations: usize,
    pub lasso: LassoOptions,
}

impl Default for ScaledLassoOptions {
    fn default() -> Self {
        ScaledLassoOptions {
            sigma_tol: 1e-8,
            max_iterations: 50,
            lasso: LassoOptions::default(),
        }
    }
}

/// `2 √(log p / n)`.
pub fn default_lambda0(n: usize, p: usize) -> f64 {
    2.0 * ((p as f64).ln() / n as f64).sqrt()
}

pub fn scaled_lasso_fit(ctx: &DesignContext, y: &[f64], lambda0: f64) -> Result<InitialFit> {
    scaled_lasso_fit_with(ctx, y, lambda0, &ScaledLassoOptions::default())
}

/// Alternates `σ̂ ← ‖y − Xβ̂‖₂/√n` with a Lasso fit whose stationarity
/// uses `λ = σ̂ λ₀` in the `‖y − Xβ‖²/n + λ‖β‖₁` convention, so the
/// stationarity condition is `|n⁻¹ X_jᵀ(y − Xβ̂)| ≤ σ̂ λ₀ / 2` (equality on the
/// active set).
pub fn scaled_lasso_fit_with(
    ctx: &DesignContext,
    y: &[f64],
    lambda0: f64,
    opts: &ScaledLassoOptions,
) -> Result<InitialFit> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda0 must be positive, got {lambda0}")));
    }
    let (yc, _) = ctx.center_response(y)?;
    let nf = ctx.n() as f64;
    let norm = |r: &[f64]| (r.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let y_scale = norm(&yc);
    let floor = 1e-12;
    if y_scale < floor {
        return Err(Error::DegenerateNoise(y_scale));
    }

    let mut sigma = y_scale;
    let mut beta = vec![0.0; ctx.p()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let sol = lasso_centered(ctx, &yc, sigma * lambda0, Some(&beta), &opts.lasso)?;
        beta = sol.coefficients;
        let sigma_new = norm(&sol.residual);
        if sigma_new < floor {
            return Err(Error::DegenerateNoise(sigma_new));
        }
        let change = (sigma_new - sigma).abs();
        sigma = sigma_new;
        if change <= opts.sigma_tol * y_scale {
            converged = true;
            break;
        }
    }

    Ok(InitialFit {
        beta_init: beta,
        sigma_hat: sigma,
        lambda0,
        iterations,
        converged,
    })
}
