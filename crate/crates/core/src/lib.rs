//! Bias-corrected Ridge significance testing for high-dimensional linear
//! models (`p >> n`).
//!
//! The pipeline is:
//!
//! 1. [`design::build_design`] standardizes the design and caches its thin SVD
//!    and the row-space projection `P_X = V Vᵀ`.
//! 2. [`lasso::scaled_lasso_fit`] produces the initial estimator and the noise
//!    level estimate.
//! 3. [`inference::corrected_fit`] computes the projection-bias corrected Ridge
//!    estimator, the standardized statistics and the bias bounds `Δ_j`.
//! 4. [`inference::single_pvalues`] / [`inference::group_pvalue`] give raw
//!    p-values and [`multiplicity`] adjusts them for familywise error control.
//!
//! [`simlab`] reproduces the synthetic experiments and [`report`] wires the
//! whole pipeline together for user data.

pub mod design;
mod error;
pub mod inference;
pub mod lasso;
pub mod multiplicity;
pub mod normal;
mod null_draws;
mod par;
pub mod report;
pub mod seeding;
pub mod simlab;
pub mod stats;

pub use design::{build_design, ridge_covariance, ridge_fit, DesignContext, RidgeCovariance};
pub use error::{Error, Result};
pub use inference::{
    corrected_fit, group_pvalue, single_pvalues, CorrectedRidgeFit, GroupHypothesis,
    MonteCarloConfig,
};
pub use lasso::{lasso_fit, scaled_lasso_fit, InitialFit};
pub use multiplicity::{
    adjust_group_pvalues, adjust_pvalues, bonferroni_holm, simulate_fz, NullDistribution,
};
pub use null_draws::NullSampler;
