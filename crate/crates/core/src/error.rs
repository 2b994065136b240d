use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {what} needs {required} items but the cap is {cap}")]
    Capacity {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("{method} did not converge after {iterations} iterations (last residuals: {history:?})")]
    NonConvergence {
        method: String,
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("pressure curve is flat (max p'' = {max_ddp:e}); the potential looks co-homologous to a constant")]
    Cohomologous { max_ddp: f64 },

    #[error("alpha = {alpha} lies outside the estimated energy range ({lo}, {hi})")]
    Range { alpha: f64, lo: f64, hi: f64 },

    #[error("degenerate normalizer: {0}")]
    Degenerate(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
