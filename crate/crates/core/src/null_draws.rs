//! σ-free Monte Carlo draws of the standardized Ridge noise `a_{n,p;j}(σ) Z_j`.
//!
//! With `Z = β̂ − E[β̂] = n^{-1/2} V diag(s/(s²+λ)) Rᵀ ε` and `Rᵀε ~ σ N(0, I_r)`,
//! the standardized vector is `diag(Ω)^{-1/2} V diag(s/(s²+λ)) W` for a standard
//! normal `W ∈ ℝʳ`. Each draw costs `O(r · |columns|)`.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::design::{DesignContext, RidgeCovariance};
use crate::par;
use crate::seeding::{substream, Domain};

const BLOCK: usize = 64;

#[derive(Debug, Clone)]
pub struct NullSampler {
    columns: Vec<usize>,
    /// `|columns| × r`; zero rows for untestable coefficients.
    loadings: DMatrix<f64>,
}

impl NullSampler {
    /// Sampler for the given coefficient indices (all of them when `None`).
    pub fn new(ctx: &DesignContext, cov: &RidgeCovariance, columns: Option<&[usize]>) -> Self {
        let columns: Vec<usize> = match columns {
            Some(c) => c.to_vec(),
            None => (0..ctx.p()).collect(),
        };
        let v = ctx.right_vectors();
        let r = ctx.rank();
        let loadings = DMatrix::from_fn(columns.len(), r, |i, k| {
            let j = columns[i];
            let a = cov.a_factors_unit[j];
            if a.is_finite() {
                a * v[(j, k)] * cov.shrink[k]
            } else {
                0.0
            }
        });
        NullSampler { columns, loadings }
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Evaluates `f` on draws `0..draws` (the standardized values for
    /// `columns()`, in order) and returns the results in draw order. Draw `b`
    /// always uses substream `b` of `(seed, domain)`, so the output does not
    /// depend on the thread count.
    pub fn map_draws<T, F>(&self, seed: u64, domain: Domain, draws: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        let r = self.loadings.ncols();
        let m = self.loadings.nrows();
        let blocks = draws.div_ceil(BLOCK);
        let per_block = par::map_range(blocks, |blk| {
            let start = blk * BLOCK;
            let len = BLOCK.min(draws - start);
            let mut w = DMatrix::<f64>::zeros(r, len);
            for c in 0..len {
                let mut rng = substream(seed, domain, (start + c) as u64);
                for k in 0..r {
                    w[(k, c)] = StandardNormal.sample(&mut rng);
                }
            }
            let z = &self.loadings * w;
            let mut out = Vec::with_capacity(len);
            for c in 0..len {
                out.push(f(&z.as_slice()[c * m..(c + 1) * m]));
            }
            out
        });
        per_block.into_iter().flatten().collect()
    }
}
