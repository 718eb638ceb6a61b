//! Design standardization, thin SVD, row-space projection and Ridge
//! covariance quantities.
//!
//! Singular values are stored for `n^{-1/2} X_std`, so that
//! `Σ̂ = n⁻¹ X_stdᵀ X_std = V diag(s²) Vᵀ` and `X_std = √n R diag(s) Vᵀ`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::stats::FiveNumber;
use crate::{Error, Result};

/// Projections with at most this many columns are kept as a dense `p × p`
/// matrix; larger ones are evaluated row by row from `V`.
pub const DENSE_PROJECTION_LIMIT: usize = 8000;

/// Diagonal projection entries at or below this are treated as zero.
pub const PROJECTION_DIAG_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct DesignOptions {
    /// Center columns and scale them to `diag(Σ̂) = 1`.
    pub standardize: bool,
    pub dense_projection_limit: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            standardize: true,
            dense_projection_limit: DENSE_PROJECTION_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
enum Projection {
    Dense(DMatrix<f64>),
    /// Entries computed on demand as `V[j,:] · V[k,:]`.
    Factored,
}

/// Standardized design with its cached thin SVD. Immutable once built.
#[derive(Debug)]
pub struct DesignContext {
    n: usize,
    p: usize,
    x_std: DMatrix<f64>,
    col_means: Vec<f64>,
    col_scales: Vec<f64>,
    constant: Vec<bool>,
    centered: bool,
    r_mat: DMatrix<f64>,
    s_vals: Vec<f64>,
    v_mat: DMatrix<f64>,
    projection: Projection,
    max_offdiag: OnceLock<Vec<f64>>,
}

/// Standardize `x_raw` (rows are observations) and factor it.
/// Thin SVD of `scale · x` as `(U, singular values, V)`.
///
/// nalgebra's bidiagonal SVD loses accuracy on some rank-deficient inputs
/// (centered designs with `n < p` hit this), so the factorization goes
/// through faer.
fn thin_svd(x: &DMatrix<f64>, scale: f64) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (n, p) = x.shape();
    let m = faer::Mat::<f64>::from_fn(n, p, |i, j| scale * x[(i, j)]);
    let svd = m.thin_svd().map_err(|_| Error::DegenerateDesign)?;
    let k = n.min(p);
    let u = DMatrix::from_fn(n, k, |i, c| svd.U()[(i, c)]);
    let v = DMatrix::from_fn(p, k, |j, c| svd.V()[(j, c)]);
    let s = (0..k).map(|c| svd.S()[c]).collect();
    Ok((u, s, v))
}

pub fn build_design(x_raw: &DMatrix<f64>, standardize: bool) -> Result<DesignContext> {
    build_design_with(
        x_raw,
        DesignOptions {
            standardize,
            ..Default::default()
        },
    )
}

pub fn build_design_with(x_raw: &DMatrix<f64>, opts: DesignOptions) -> Result<DesignContext> {
    let (n, p) = x_raw.shape();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 observations, got {n}")));
    }
    if p < 1 {
        return Err(Error::InvalidArgument("need at least one covariate".into()));
    }
    for j in 0..p {
        for i in 0..n {
            if !x_raw[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    what: "design",
                    row: i,
                    col: j,
                });
            }
        }
    }

    let mut x_std = x_raw.clone();
    let mut col_means = vec![0.0; p];
    let mut col_scales = vec![1.0; p];
    let mut constant = vec![false; p];
    for j in 0..p {
        let mut col = x_std.column_mut(j);
        if opts.standardize {
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            col_means[j] = mean;
            if sd <= 1e-12 * (1.0 + mean.abs()) {
                constant[j] = true;
                col.fill(0.0);
            } else {
                col_scales[j] = sd;
                col.apply(|v| *v = (*v - mean) / sd);
            }
        } else if col.iter().all(|v| *v == 0.0) {
            constant[j] = true;
        }
    }
    if constant.iter().all(|&c| c) {
        return Err(Error::DegenerateDesign);
    }

    let (r_full, s_full, v_full) = thin_svd(&x_std, 1.0 / (n as f64).sqrt())?;

    let mut order: Vec<usize> = (0..s_full.len()).collect();
    order.sort_by(|&a, &b| s_full[b].total_cmp(&s_full[a]));
    let s_max = s_full[order[0]];
    let cutoff = s_max * n.max(p) as f64 * f64::EPSILON;
    let kept: Vec<usize> = order.into_iter().filter(|&k| s_full[k] > cutoff).collect();
    if kept.is_empty() {
        return Err(Error::DegenerateDesign);
    }
    let r = kept.len();
    let s_vals: Vec<f64> = kept.iter().map(|&k| s_full[k]).collect();
    let r_mat = DMatrix::from_fn(n, r, |i, c| r_full[(i, kept[c])]);
    let v_mat = DMatrix::from_fn(p, r, |j, c| v_full[(j, kept[c])]);

    let projection = if p <= opts.dense_projection_limit {
        let mut pm = &v_mat * v_mat.transpose();
        for j in 0..p {
            for k in (j + 1)..p {
                pm[(k, j)] = pm[(j, k)];
            }
        }
        Projection::Dense(pm)
    } else {
        Projection::Factored
    };

    Ok(DesignContext {
        n,
        p,
        x_std,
        col_means,
        col_scales,
        constant,
        centered: opts.standardize,
        r_mat,
        s_vals,
        v_mat,
        projection,
        max_offdiag: OnceLock::new(),
    })
}

impl DesignContext {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.s_vals.len()
    }

    pub fn x_std(&self) -> &DMatrix<f64> {
        &self.x_std
    }

    pub fn col_means(&self) -> &[f64] {
        &self.col_means
    }

    pub fn col_scales(&self) -> &[f64] {
        &self.col_scales
    }

    /// Columns excluded from testing (constant, or all-zero when not
    /// standardizing).
    pub fn constant_columns(&self) -> &[bool] {
        &self.constant
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Left singular vectors, `n × r`.
    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.r_mat
    }

    /// Singular values of `n^{-1/2} X_std`, nonincreasing and positive.
    pub fn singular_values(&self) -> &[f64] {
        &self.s_vals
    }

    /// Right singular vectors, `p × r`.
    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.v_mat
    }

    /// Smallest nonzero eigenvalue of `Σ̂`.
    pub fn lambda_min_nonzero(&self) -> f64 {
        let s = self.s_vals[self.s_vals.len() - 1];
        s * s
    }

    pub fn has_dense_projection(&self) -> bool {
        matches!(self.projection, Projection::Dense(_))
    }

    /// The materialized `P_X`, when it was small enough to keep.
    pub fn projection_dense(&self) -> Option<&DMatrix<f64>> {
        match &self.projection {
            Projection::Dense(m) => Some(m),
            Projection::Factored => None,
        }
    }

    pub fn projection_entry(&self, j: usize, k: usize) -> f64 {
        match &self.projection {
            Projection::Dense(m) => m[(j, k)],
            Projection::Factored => self.v_mat.row(j).dot(&self.v_mat.row(k)),
        }
    }

    pub fn projection_diag(&self, j: usize) -> f64 {
        self.projection_entry(j, j)
    }

    /// Row `j` of `P_X`.
    pub fn projection_row(&self, j: usize) -> Vec<f64> {
        match &self.projection {
            Projection::Dense(m) => m.row(j).iter().copied().collect(),
            Projection::Factored => {
                let vj = self.v_mat.row(j).transpose();
                (&self.v_mat * vj).iter().copied().collect()
            }
        }
    }

    /// `P_X v` computed as `V (Vᵀ v)`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(v);
        let coords = self.v_mat.tr_mul(&v);
        (&self.v_mat * coords).iter().copied().collect()
    }

    /// `max_{k≠j} |(P_X)_{jk}|` for every `j`, computed once.
    pub fn max_offdiag_abs(&self) -> &[f64] {
        self.max_offdiag.get_or_init(|| {
            (0..self.p)
                .map(|j| {
                    let row = self.projection_row(j);
                    row.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
                })
                .collect()
        })
    }

    /// Center `y` the same way the columns were centered. Returns the centered
    /// response and the removed mean.
    pub fn center_response(&self, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "response has {} entries, design has {} rows",
                y.len(),
                self.n
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "response",
                row: i,
                col: 0,
            });
        }
        if !self.centered {
            return Ok((y.to_vec(), 0.0));
        }
        let mean = y.iter().sum::<f64>() / self.n as f64;
        Ok((y.iter().map(|v| v - mean).collect(), mean))
    }

    /// `X_std β`.
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(beta);
        (&self.x_std * b).iter().copied().collect()
    }

    /// Whether coefficient `j` can be tested: non-constant column with a
    /// nonzero projection diagonal.
    pub fn is_testable(&self, j: usize) -> bool {
        !self.constant[j] && self.projection_diag(j) > PROJECTION_DIAG_ZERO
    }
}

/// Diagonal of `Ω(λ) = (Σ̂+λI)⁻¹ Σ̂ (Σ̂+λI)⁻¹` and the derived scale factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeCovariance {
    pub lambda: f64,
    pub omega_diag: Vec<f64>,
    pub omega_min: f64,
    /// `Ω_jj^{-1/2}`; infinite where `Ω_jj = 0`.
    pub a_factors_unit: Vec<f64>,
    /// `s_k / (s_k² + λ)` per singular value.
    pub shrink: Vec<f64>,
}

impl RidgeCovariance {
    /// `a_{n,p;j}(σ) = n^{1/2} σ⁻¹ Ω_jj^{-1/2}`.
    pub fn a_factor(&self, n: usize, sigma: f64, j: usize) -> f64 {
        (n as f64).sqrt() / sigma * self.a_factors_unit[j]
    }
}

pub fn ridge_covariance(ctx: &DesignContext, lambda: f64) -> Result<RidgeCovariance> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge lambda must be positive, got {lambda}")));
    }
    let weights: Vec<f64> = ctx
        .s_vals
        .iter()
        .map(|s| {
            let s2 = s * s;
            s2 / ((s2 + lambda) * (s2 + lambda))
        })
        .collect();
    let omega_diag: Vec<f64> = (0..ctx.p)
        .map(|j| {
            if ctx.constant[j] {
                return 0.0;
            }
            ctx.v_mat
                .row(j)
                .iter()
                .zip(&weights)
                .map(|(v, w)| w * v * v)
                .sum()
        })
        .collect();
    let omega_min = omega_diag.iter().copied().fold(f64::INFINITY, f64::min);
    let a_factors_unit = omega_diag
        .iter()
        .map(|&o| if o > 0.0 { o.sqrt().recip() } else { f64::INFINITY })
        .collect();
    let shrink = ctx.s_vals.iter().map(|s| s / (s * s + lambda)).collect();
    Ok(RidgeCovariance {
        lambda,
        omega_diag,
        omega_min,
        a_factors_unit,
        shrink,
    })
}

/// Ridge estimate `(Σ̂+λI)⁻¹ n⁻¹ X_stdᵀ y` on the standardized scale, with `y`
/// centered when the design is.
pub fn ridge_fit(ctx: &DesignContext, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge lambda must be positive, got {lambda}")));
    }
    let (yc, _) = ctx.center_response(y)?;
    Ok(ridge_fit_centered(ctx, &yc, lambda))
}

pub(crate) fn ridge_fit_centered(ctx: &DesignContext, yc: &[f64], lambda: f64) -> Vec<f64> {
    let sqrt_n = (ctx.n as f64).sqrt();
    let y = DVector::from_column_slice(yc);
    let mut t = ctx.r_mat.tr_mul(&y);
    for (k, tk) in t.iter_mut().enumerate() {
        let s = ctx.s_vals[k];
        *tk *= s / (sqrt_n * (s * s + lambda));
    }
    (&ctx.v_mat * t).iter().copied().collect()
}

/// `κ_j = max_{k≠j} |(P_X)_{jk}| / |(P_X)_{jj}|` with summary quantiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaDiagnostics {
    /// `+∞` where the projection diagonal vanishes.
    pub kappa: Vec<f64>,
    /// Quantiles over the finite values.
    pub summary: Option<FiveNumber>,
    /// Indices with `(P_X)_{jj} = 0`; non-empty means the minimum-variance
    /// condition fails.
    pub zero_diagonal: Vec<usize>,
}

pub fn kappa_diagnostics(ctx: &DesignContext) -> KappaDiagnostics {
    let offdiag = ctx.max_offdiag_abs();
    let mut zero_diagonal = Vec::new();
    let kappa: Vec<f64> = (0..ctx.p)
        .map(|j| {
            let d = ctx.projection_diag(j).abs();
            if ctx.constant[j] || d <= PROJECTION_DIAG_ZERO {
                zero_diagonal.push(j);
                f64::INFINITY
            } else {
                offdiag[j] / d
            }
        })
        .collect();
    let summary = FiveNumber::of(&kappa);
    KappaDiagnostics {
        kappa,
        summary,
        zero_diagonal,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    Single,
    Multiple,
}

/// Unit-constant detection scale for each coefficient:
/// `max(κ_j s₀ √(log p / n), t / (|(P_X)_jj| a_{n,p;j}(σ)))` with `t = 1` for
/// single testing and `t = √(log p)` under multiplicity adjustment.
pub fn detection_bound(
    ctx: &DesignContext,
    cov: &RidgeCovariance,
    sigma: f64,
    s0_bound: usize,
    mode: DetectionMode,
) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if s0_bound < 1 {
        return Err(Error::InvalidArgument("sparsity bound must be at least 1".into()));
    }
    let (n, p) = (ctx.n as f64, ctx.p as f64);
    let rate = (p.ln() / n).sqrt();
    let tail = match mode {
        DetectionMode::Single => 1.0,
        DetectionMode::Multiple => p.ln().sqrt(),
    };
    let kappa = kappa_diagnostics(ctx).kappa;
    Ok((0..ctx.p)
        .map(|j| {
            if kappa[j].is_infinite() || cov.omega_diag[j] <= 0.0 {
                return f64::INFINITY;
            }
            let bias_term = kappa[j] * s0_bound as f64 * rate;
            let noise_term = tail / (ctx.projection_diag(j).abs() * cov.a_factor(ctx.n, sigma, j));
            bias_term.max(noise_term)
        })
        .collect())
}
