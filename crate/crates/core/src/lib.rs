//! Analysis and simulation of threshold-ALOHA, a slotted random-access
//! policy in which a source stays silent until its age of information
//! reaches a threshold `gamma` and then attempts each slot with
//! probability `tau`.
//!
//! * [`exact`]: closed-form stationary distribution of the number of active
//!   sources for finite `n`, with an enumeration oracle.
//! * [`asymptotics`]: large-network limit, regime selection and the
//!   `(r, alpha)` optimizer.
//! * [`sim`]: slot-level Monte Carlo simulator with baseline policies.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod model;
mod numeric;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    to_asymptotic, validate_policy, AsymptoticParams, PolicyParams, Purpose, SlotFeedback,
};
