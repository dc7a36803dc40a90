use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates an operation precondition (e.g. a series that is not
    /// compactly supported where zero-extension is required).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Discretization parameters that cannot resolve the requested problem.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A material or data bound (H1-H3) does not hold.
    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
    },

    /// Non-finite values in supplied fields.
    #[error("data error: {0}")]
    Data(String),

    /// Arrays or grids that do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A linear system that could not be factorized.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// Fixed-point iteration ran out of iterations.
    #[error("picard iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Iteration { iterations: usize, residual: f64 },

    /// The time marching blew up.
    #[error("solver diverged at t = {time}: |d| = {norm:e} exceeds guard {guard:e}")]
    Divergence { time: f64, norm: f64, guard: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
