//! Standard normal tail helpers.

use statrs::function::erf::erfc;

/// Two-sided tail `2(1 - Φ(|x|))`, accurate far into the tail.
pub fn two_sided_pvalue(x: f64) -> f64 {
    erfc(x.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Standard normal CDF.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
