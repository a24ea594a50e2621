use rand::distr::Bernoulli;
use serde::{Deserialize, Serialize};

use super::policy::{EstimatorParams, PolicyKind};
use super::streams::SourceStreams;
use crate::model::SlotFeedback;

/// Full network state at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    /// Age of the freshest delivered packet per source; always >= 1.
    pub dest_age: Vec<u64>,
    /// Age of the packet held by each source (arrivals mode). A packet
    /// that arrives during slot `t` has age 1 at slot `t + 1` and can be
    /// sent from then on.
    pub source_age: Option<Vec<u64>>,
    /// Slots since each source's last success (arrivals mode); this is the
    /// age that drives the access rule. Without arrivals it equals
    /// `dest_age`.
    pub contention_age: Option<Vec<u64>>,
    pub slot: u64,
    pub estimate: Option<f64>,
}

impl NetworkState {
    pub fn n(&self) -> usize {
        self.dest_age.len()
    }

    pub fn contention(&self) -> &[u64] {
        self.contention_age.as_deref().unwrap_or(&self.dest_age)
    }

    /// Number of sources eligible under threshold `gamma`.
    pub fn active_count(&self, gamma: u64) -> usize {
        self.contention().iter().filter(|&&a| a >= gamma).count()
    }
}

/// Reference implementation of one slot, written directly from the age
/// recursion. It visits every source each slot; [`super::Simulator`] is the
/// fast equivalent and must produce the same trajectory given the same
/// streams.
pub fn step(
    state: &NetworkState,
    policy: &PolicyKind,
    streams: &mut SourceStreams,
) -> (NetworkState, SlotFeedback) {
    let gamma = policy.gamma();
    let t = state.slot;
    let tau = policy
        .fixed_tau()
        .unwrap_or_else(|| EstimatorParams::attempt_probability(state.estimate.unwrap_or(1.0)));
    let draw = Bernoulli::new(tau).expect("tau in [0, 1]");

    let clock = streams.uses_clock();
    let mut attempters = Vec::new();
    for (i, &age) in state.contention().iter().enumerate() {
        if age < gamma {
            continue;
        }
        let attempts = if clock {
            streams.clock_attempts_at(i, t)
        } else {
            streams.attempt(i, &draw)
        };
        if attempts {
            attempters.push(i);
        }
    }
    let feedback =
        SlotFeedback::from_attempts(attempters.len(), attempters.last().copied().unwrap_or(0));
    let winner = match feedback {
        SlotFeedback::Success(i) => Some(i),
        _ => None,
    };
    if clock {
        for &i in &attempters {
            streams.clock_after_attempt(i, t, winner.is_some());
        }
    }

    let mut next = state.clone();
    next.slot = t + 1;
    match (&mut next.source_age, &mut next.contention_age) {
        (Some(src), Some(cont)) => {
            for i in 0..src.len() {
                if winner == Some(i) {
                    next.dest_age[i] = src[i] + 1;
                    cont[i] = 1;
                } else {
                    next.dest_age[i] += 1;
                    cont[i] += 1;
                }
                src[i] = if streams.arrives_at(i, t) {
                    1
                } else {
                    src[i] + 1
                };
            }
        }
        _ => {
            for (i, age) in next.dest_age.iter_mut().enumerate() {
                *age = if winner == Some(i) { 1 } else { *age + 1 };
            }
        }
    }
    if let (Some(m), Some(est)) = (next.estimate, policy.estimator()) {
        let mut m = est.update(m, feedback);
        if est.activation_credit {
            m += next.contention().iter().filter(|&&a| a == gamma).count() as f64;
        }
        next.estimate = Some(m);
    }
    (next, feedback)
}
