//! Exact finite-`n` steady state of the truncated age chain.
//!
//! [`pmf`] holds the closed-form distribution of the number of active
//! sources; [`enumerate`] builds the full chain over recurrent states and
//! solves it numerically, serving as an independent oracle for the closed
//! form.

pub mod enumerate;
pub mod pmf;

pub use enumerate::{
    enumerate_stationary, enumerate_stationary_over, is_recurrent, StateSpace, StateType,
    StationaryDistribution, TruncatedState,
};
pub use pmf::{
    active_pmf, log_pm_ratio, log_state_count, per_state_probability, pm_ratio, success_prob_q0,
    ActivePmf,
};
