use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("gamma < n+1 (gamma = {gamma}, n = {n}): closed-form analysis needs room for n distinct below-threshold ages")]
    GammaTooSmall { gamma: u64, n: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state space too large: {count} recurrent states exceeds the limit of {limit}")]
    StateSpaceTooLarge { count: u64, limit: u64 },

    #[error(
        "stationary solve did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("adaptive quadrature exceeded {max_intervals} subintervals on [{lo}, {hi}]")]
    QuadratureNotConverged {
        lo: f64,
        hi: f64,
        max_intervals: usize,
    },

    #[error("indeterminate regime: integral of f between outer roots is {integral:e}, too close to zero to select a peak")]
    IndeterminateRegime { integral: f64 },

    #[error(
        "optimizer did not converge; best so far r = {r}, alpha = {alpha}, aoi/n = {aoi_scaled}"
    )]
    OptimizerNotConverged { r: f64, alpha: f64, aoi_scaled: f64 },

    #[error("no admissible parameters found in the search box")]
    NoFeasiblePoint,

    #[error("simulation budget exceeded: n * slots = {requested} > {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
