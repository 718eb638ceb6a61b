//! Browser bindings for a few hdinfer operations. Every function returns a
//! JSON string so the page can stay plain JavaScript. The `*_json` functions
//! carry the logic and run natively; the exported wrappers only convert errors.

use hdinfer::design::kappa_diagnostics;
use hdinfer::simlab::{generate_design, run_scenario, Model, ScenarioConfig};
use hdinfer::stats::FiveNumber;
use hdinfer::{build_design, ridge_covariance, simulate_fz, MonteCarloConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn model(name: &str) -> Result<Model, String> {
    match name {
        "m1" => Ok(Model::M1),
        "m2" => Ok(Model::M2),
        other => Err(format!("unknown model {other:?}")),
    }
}

fn config(name: &str, n: usize, p: usize, rho: f64, seed: u64) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::new(model(name)?, n, p, 0, 1.0);
    cfg.rho = rho;
    cfg.seed = seed;
    Ok(cfg)
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn js(e: hdinfer::Error) -> String {
    e.to_string()
}

fn exported(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct KappaView {
    rank: usize,
    omega_min: f64,
    summary: Option<FiveNumber>,
    /// Finite values, ascending.
    sorted: Vec<f64>,
}

/// Ratio of the largest off-diagonal projection entry to the diagonal one,
/// for every column of a generated design.
pub fn kappa_profile_json(model: &str, n: usize, p: usize, rho: f64, seed: u64) -> Result<String, String> {
    let cfg = config(model, n, p, rho, seed)?;
    cfg.validate().map_err(js)?;
    let ctx = build_design(&generate_design(&cfg, seed), true).map_err(js)?;
    let cov = ridge_covariance(&ctx, 1.0 / n as f64).map_err(js)?;
    let kd = kappa_diagnostics(&ctx);
    let mut sorted: Vec<f64> = kd.kappa.into_iter().filter(|k| k.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    json(&KappaView {
        rank: ctx.rank(),
        omega_min: cov.omega_diag.iter().copied().fold(f64::INFINITY, f64::min),
        summary: kd.summary,
        sorted,
    })
}

#[wasm_bindgen]
pub fn kappa_profile(model: &str, n: usize, p: usize, rho: f64, seed: u64) -> Result<String, JsError> {
    exported(kappa_profile_json(model, n, p, rho, seed))
}

#[derive(Serialize)]
struct NullCurve {
    tests: usize,
    c: Vec<f64>,
    simulated: Vec<f64>,
    independent: Vec<f64>,
    bonferroni: Vec<f64>,
}

/// Simulated null distribution of the smallest p-value against the
/// independence and Bonferroni curves, on a log grid of cutoffs.
pub fn null_curve_json(
    model: &str,
    n: usize,
    p: usize,
    rho: f64,
    seed: u64,
    draws: usize,
) -> Result<String, String> {
    let cfg = config(model, n, p, rho, seed)?;
    cfg.validate().map_err(js)?;
    let ctx = build_design(&generate_design(&cfg, seed), true).map_err(js)?;
    let cov = ridge_covariance(&ctx, 1.0 / n as f64).map_err(js)?;
    let fz = simulate_fz(&ctx, &cov, &MonteCarloConfig { draws, seed }).map_err(js)?;
    let tests = (0..ctx.p())
        .filter(|&j| ctx.is_testable(j) && cov.omega_diag[j] > 0.0)
        .count();
    let c: Vec<f64> = (0..=60).map(|k| 10f64.powf(-5.0 + 5.0 * k as f64 / 60.0)).collect();
    json(&NullCurve {
        tests,
        simulated: c.iter().map(|&c| fz.cdf(c)).collect(),
        independent: c.iter().map(|&c| 1.0 - (1.0 - c).powi(tests as i32)).collect(),
        bonferroni: c.iter().map(|&c| (c * tests as f64).min(1.0)).collect(),
        c,
    })
}

#[wasm_bindgen]
pub fn null_curve(
    model: &str,
    n: usize,
    p: usize,
    rho: f64,
    seed: u64,
    draws: usize,
) -> Result<String, JsError> {
    exported(null_curve_json(model, n, p, rho, seed, draws))
}

#[derive(Serialize)]
struct ScenarioView {
    snr: f64,
    rank: usize,
    completed_reps: usize,
    sigma_hat_mean: f64,
    avg_type1: f64,
    avg_power: Option<f64>,
    avg_power_multiple: Option<f64>,
    fwer: f64,
    v_distribution: Vec<usize>,
}

/// Replicated experiment with the first `s0` coefficients equal to `b`.
#[allow(clippy::too_many_arguments)]
pub fn scenario_json(
    model: &str,
    n: usize,
    p: usize,
    rho: f64,
    s0: usize,
    b: f64,
    reps: usize,
    seed: u64,
) -> Result<String, String> {
    let mut cfg = config(model, n, p, rho, seed)?;
    cfg.s0 = s0;
    cfg.b = b;
    cfg.reps = reps;
    cfg.mc_draws = 2000;
    let r = run_scenario(&cfg).map_err(js)?;
    json(&ScenarioView {
        snr: r.snr,
        rank: r.rank,
        completed_reps: r.completed_reps,
        sigma_hat_mean: r.sigma_hat_mean,
        avg_type1: r.avg_type1,
        avg_power: r.avg_power,
        avg_power_multiple: r.avg_power_multiple,
        fwer: r.fwer,
        v_distribution: r.v_distribution,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn scenario(
    model: &str,
    n: usize,
    p: usize,
    rho: f64,
    s0: usize,
    b: f64,
    reps: usize,
    seed: u64,
) -> Result<String, JsError> {
    exported(scenario_json(model, n, p, rho, s0, b, reps, seed))
}
