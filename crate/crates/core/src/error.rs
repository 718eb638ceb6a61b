use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate design: every column is constant")]
    DegenerateDesign,

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lasso did not converge after {sweeps} sweeps (max change {max_change:e})")]
    LassoNotConverged {
        sweeps: usize,
        max_change: f64,
        /// Last iterate, usable as a warm start.
        best: Vec<f64>,
    },

    #[error("degenerate noise estimate: sigma collapsed to {0:e}")]
    DegenerateNoise(f64),

    #[error("empty group hypothesis")]
    EmptyGroup,

    #[error("scenario failed: {failed} of {reps} replicates errored (first: {first})")]
    ScenarioFailed {
        failed: usize,
        reps: usize,
        first: String,
    },
}
