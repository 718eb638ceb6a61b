//! Dense-algebra oracles shared by the integration tests. The oracles work
//! from `X_std` directly and never touch the SVD.

#![allow(dead_code)]

use hdinfer::inference::DEFAULT_XI;
use hdinfer::lasso::default_lambda0;
use hdinfer::simlab::{equicorrelated_matrix, standard_gaussian_matrix};
use hdinfer::{build_design, corrected_fit, ridge_covariance, scaled_lasso_fit};
use nalgebra::{DMatrix, DVector};

pub fn sample_cov(xs: &DMatrix<f64>) -> DMatrix<f64> {
    xs.transpose() * xs / xs.nrows() as f64
}

/// `(Σ̂ + λI)⁻¹ n⁻¹ Xᵀ v` by LU.
pub fn ridge_solve(xs: &DMatrix<f64>, v: &[f64], lambda: f64) -> Vec<f64> {
    let n = xs.nrows() as f64;
    let p = xs.ncols();
    let a = sample_cov(xs) + DMatrix::identity(p, p) * lambda;
    let rhs = xs.transpose() * DVector::from_column_slice(v) / n;
    a.lu().solve(&rhs).expect("ridge system is regular").iter().copied().collect()
}

/// Diagonal of `(Σ̂+λI)⁻¹ Σ̂ (Σ̂+λI)⁻¹`.
pub fn omega_diag(xs: &DMatrix<f64>, lambda: f64) -> Vec<f64> {
    let p = xs.ncols();
    let s = sample_cov(xs);
    let inv = (&s + DMatrix::identity(p, p) * lambda)
        .try_inverse()
        .expect("ridge system is regular");
    let om = &inv * s * &inv;
    (0..p).map(|j| om[(j, j)]).collect()
}

/// Projection onto the row space of a centered design.
///
/// With `1ᵀX = 0`, `Xᵀ(XXᵀ + 11ᵀ)⁻¹X` equals `Xᵀ(XXᵀ)⁺X` whenever the row
/// space has dimension `n − 1`; for tall full-column-rank designs the answer
/// is `(XᵀX)⁻¹XᵀX`.
pub fn centered_projection(xs: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = xs.shape();
    if n <= p + 1 {
        let ones = DMatrix::from_element(n, n, 1.0);
        let g = xs * xs.transpose() + ones;
        xs.transpose() * g.try_inverse().expect("regular Gram matrix") * xs
    } else {
        let g = xs.transpose() * xs;
        g.clone().lu().solve(&g).expect("full column rank")
    }
}

/// `n × p` design with orthogonal, centered columns and `n⁻¹‖X_j‖² = 1`
/// (cosine basis without the constant vector). Needs `p < n`.
pub fn cosine_design(n: usize, p: usize) -> DMatrix<f64> {
    assert!(p < n);
    DMatrix::from_fn(n, p, |i, k| {
        let f = std::f64::consts::PI * (i as f64 + 0.5) * (k + 1) as f64 / n as f64;
        std::f64::consts::SQRT_2 * f.cos()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 1% critical value of the Kolmogorov distribution.
pub const KS_CRIT_1PCT: f64 = 1.628;

/// Residual of `β̂_corr;j = Z_j + γ_j` where `Z` is the Ridge map applied to
/// the noise and `γ_j = (P_X)_jj β⁰_j − Σ_{k≠j}(P_X)_jk(β̂_init;k − β⁰_k) + b_j`,
/// `b_j = E[β̂_j] − θ⁰_j`; all from dense oracles.
pub fn decomposition_residual(n: usize, p: usize, seed: u64) -> f64 {
    let x = equicorrelated_matrix(n, p, 0.3, seed);
    let ctx = build_design(&x, true).unwrap();
    let xs = ctx.x_std();
    let lambda = 1.0 / n as f64;
    let mut beta0 = vec![0.0; p];
    for (j, b) in beta0.iter_mut().take(3).enumerate() {
        *b = 1.0 + j as f64;
    }
    let eps: Vec<f64> = standard_gaussian_matrix(n, 1, seed + 1000).iter().copied().collect();
    let signal: Vec<f64> = (xs * DVector::from_column_slice(&beta0)).iter().copied().collect();
    let y: Vec<f64> = signal.iter().zip(&eps).map(|(s, e)| s + e).collect();

    let cov = ridge_covariance(&ctx, lambda).unwrap();
    let init = scaled_lasso_fit(&ctx, &y, default_lambda0(n, p)).unwrap();
    let fit = corrected_fit(&ctx, &cov, &init, &y, DEFAULT_XI).unwrap();

    let pm = centered_projection(xs);
    let z = ridge_solve(xs, &eps, lambda);
    let mean_fit = ridge_solve(xs, &signal, lambda);
    let theta0 = &pm * DVector::from_column_slice(&beta0);
    (0..p)
        .map(|j| {
            let cross: f64 = (0..p)
                .filter(|&k| k != j)
                .map(|k| pm[(j, k)] * (init.beta_init[k] - beta0[k]))
                .sum();
            let gamma = pm[(j, j)] * beta0[j] - cross + (mean_fit[j] - theta0[j]);
            (fit.beta_corr[j] - z[j] - gamma).abs()
        })
        .fold(0.0, f64::max)
}
