//! Slot-level Monte Carlo simulation.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). The key is derived from
//! the master seed with `seed_from_u64`; source `i` draws its attempts from
//! stream `2i` and its packet arrivals from stream `2i + 1`, and the
//! initial ages come from stream `u64::MAX`. A source's draws therefore do
//! not depend on how many other sources exist or in which order they are
//! visited, which makes runs reproducible across platforms and lets the
//! fast engine and the reference [`step`] share trajectories.

mod concentration;
mod engine;
mod policy;
mod report;
mod state;
mod streams;

pub use concentration::{concentration_test, concentration_test_with, ConcentrationPoint};
pub use engine::{
    default_warmup, simulate, simulate_arrivals, simulate_with, Init, SimConfig, Simulator,
    DEFAULT_BUDGET,
};
pub use policy::{stabilized_estimator_update, AccessRule, EstimatorParams, PolicyKind};
pub use report::{ArrivalStats, SimReport};
pub use state::{step, NetworkState};
pub use streams::{AttemptSampling, SourceStreams};

#[cfg(test)]
mod tests;
