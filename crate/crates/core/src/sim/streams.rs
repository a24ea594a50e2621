use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};

use super::policy::PolicyKind;

const INIT_STREAM: u64 = u64::MAX;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-source random streams, plus the arrival schedule in arrivals mode.
/// Arrivals are produced as geometric gaps so the schedule can be consumed
/// either slot by slot or lazily at delivery times with identical results.
#[derive(Debug, Clone)]
pub struct SourceStreams {
    attempts: Vec<ChaCha8Rng>,
    /// Gap distribution between attempts when sampling with clocks.
    clock: Option<Geometric>,
    /// Next attempt slot of each active source (reference stepper only).
    next_attempt: Vec<Option<u64>>,
    arrivals: Option<ArrivalSchedule>,
}

/// How attempts of a fixed-probability rule are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptSampling {
    /// Each active source draws a geometric gap to its next attempt when
    /// it becomes active and after each failed attempt. Equivalent in law
    /// to per-slot draws and costs O(attempts) per slot.
    #[default]
    Clock,
    /// One Bernoulli draw per active source per slot.
    PerSlot,
}

#[derive(Debug, Clone)]
struct ArrivalSchedule {
    rngs: Vec<ChaCha8Rng>,
    gap: Geometric,
    next: Vec<u64>,
    last: Vec<i64>,
}

impl SourceStreams {
    /// `policy` must already be validated. Rules without a fixed attempt
    /// probability always sample per slot.
    pub fn new(seed: u64, n: usize, policy: &PolicyKind, sampling: AttemptSampling) -> Self {
        let attempts = (0..n as u64).map(|i| stream(seed, 2 * i)).collect();
        let clock = match (sampling, policy.fixed_tau()) {
            (AttemptSampling::Clock, Some(tau)) => {
                Some(Geometric::new(tau).expect("validated tau"))
            }
            _ => None,
        };
        let arrivals = policy.arrival_rate.map(|rate| {
            let gap = Geometric::new(rate).expect("arrival rate validated");
            let mut rngs: Vec<_> = (0..n as u64).map(|i| stream(seed, 2 * i + 1)).collect();
            let next = rngs.iter_mut().map(|r| gap.sample(r)).collect();
            ArrivalSchedule {
                rngs,
                gap,
                next,
                last: vec![-1; n],
            }
        });
        Self {
            attempts,
            clock,
            next_attempt: vec![None; n],
            arrivals,
        }
    }

    pub(crate) fn init_rng(seed: u64) -> ChaCha8Rng {
        stream(seed, INIT_STREAM)
    }

    pub fn len(&self) -> usize {
        self.attempts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attempts.is_empty()
    }

    pub(crate) fn uses_clock(&self) -> bool {
        self.clock.is_some()
    }

    /// Slots from now until the next attempt of `source` (0 = this slot).
    #[inline]
    pub(crate) fn attempt_gap(&mut self, source: usize) -> u64 {
        let gap = self.clock.as_ref().expect("clock sampling");
        gap.sample(&mut self.attempts[source])
    }

    /// Clock bookkeeping for the reference stepper: whether active
    /// `source` attempts in slot `t`.
    pub(crate) fn clock_attempts_at(&mut self, source: usize, t: u64) -> bool {
        let next = match self.next_attempt[source] {
            Some(at) => at,
            None => {
                let at = t + self.attempt_gap(source);
                self.next_attempt[source] = Some(at);
                at
            }
        };
        next == t
    }

    /// Clock bookkeeping after an attempt in slot `t`.
    pub(crate) fn clock_after_attempt(&mut self, source: usize, t: u64, succeeded: bool) {
        self.next_attempt[source] = if succeeded {
            None
        } else {
            Some(t + 1 + self.attempt_gap(source))
        };
    }

    #[inline]
    pub(crate) fn attempt(&mut self, source: usize, draw: &Bernoulli) -> bool {
        draw.sample(&mut self.attempts[source])
    }

    /// Whether a packet arrives at `source` in slot `t`. Must be called for
    /// consecutive slots.
    pub(crate) fn arrives_at(&mut self, source: usize, t: u64) -> bool {
        let s = self.arrivals.as_mut().expect("arrivals mode");
        if s.next[source] != t {
            return false;
        }
        s.last[source] = t as i64;
        s.next[source] = t + 1 + s.gap.sample(&mut s.rngs[source]);
        true
    }

    /// Slot of the latest arrival at `source` no later than `t`, or -1 if
    /// there was none since the start.
    pub(crate) fn latest_arrival(&mut self, source: usize, t: i64) -> i64 {
        let s = self.arrivals.as_mut().expect("arrivals mode");
        while (s.next[source] as i64) <= t {
            s.last[source] = s.next[source] as i64;
            s.next[source] += 1 + s.gap.sample(&mut s.rngs[source]);
        }
        s.last[source]
    }
}
