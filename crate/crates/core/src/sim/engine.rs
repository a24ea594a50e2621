use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::distr::Bernoulli;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::policy::{EstimatorParams, PolicyKind};
use super::report::{ArrivalStats, SimReport};
use super::state::NetworkState;
use super::streams::{AttemptSampling, SourceStreams};
use crate::error::{invalid, Error, Result};
use crate::model::SlotFeedback;

/// Default cap on `n * (warmup + slots)`.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Distinct ages drawn without replacement from `1..=max(gamma, n+1)`,
    /// clamped at `gamma`.
    RandomDistinct,
    /// Every source starts at the threshold.
    AllActive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Measured slots after warmup.
    pub slots: u64,
    /// `None` uses [`default_warmup`].
    pub warmup: Option<u64>,
    pub seed: u64,
    pub init: Init,
    pub budget: u128,
    pub sampling: AttemptSampling,
}

impl SimConfig {
    pub fn new(slots: u64, seed: u64) -> Self {
        Self {
            slots,
            warmup: None,
            seed,
            init: Init::RandomDistinct,
            budget: DEFAULT_BUDGET,
            sampling: AttemptSampling::default(),
        }
    }

    pub fn sampling(mut self, sampling: AttemptSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn warmup(mut self, warmup: u64) -> Self {
        self.warmup = Some(warmup);
        self
    }

    pub fn init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }
}

/// `max(10 * gamma, 100_000)`.
pub fn default_warmup(gamma: u64) -> u64 {
    gamma.saturating_mul(10).max(100_000)
}

/// Event-driven slot simulator. Ages are stored as the slot at which they
/// were last 0, so only sources that attempt are touched in a slot; age
/// sums are accumulated per constant-origin segment.
#[derive(Debug, Clone)]
pub struct Simulator {
    policy: PolicyKind,
    gamma: u64,
    streams: SourceStreams,
    slot: u64,
    window: (u64, u64),
    /// Contention age at slot `t` is `t - origin`.
    origin: Vec<i64>,
    /// Destination age origin (arrivals mode only).
    dest_origin: Vec<i64>,
    segment_start: Vec<u64>,
    dest_sum: Vec<i128>,
    contention_sum: Vec<i128>,
    successes: Vec<u64>,
    pending: VecDeque<(u64, u32)>,
    /// Active sources, per-slot sampling.
    active: Vec<u32>,
    /// Active sources keyed by next attempt slot, clock sampling.
    clock: BinaryHeap<Reverse<(u64, u32)>>,
    active_count: usize,
    attempters: Vec<u32>,
    estimate: Option<f64>,
    histogram: Vec<u64>,
    attempts_total: u64,
    rx_total: u64,
    fixed_draw: Option<Bernoulli>,
    seed: u64,
    init: Init,
}

impl Simulator {
    /// Builds the initial state. The run length is needed up front to
    /// place the measurement window.
    pub fn new(policy: PolicyKind, n: usize, config: &SimConfig) -> Result<Self> {
        policy.validate()?;
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        if n > u32::MAX as usize {
            return Err(invalid("n", "too many sources"));
        }
        let gamma = policy.gamma();
        let warmup = config.warmup.unwrap_or_else(|| default_warmup(gamma));
        if config.slots == 0 || config.slots <= warmup {
            return Err(invalid(
                "slots",
                format!("must exceed warmup ({warmup}), got {}", config.slots),
            ));
        }
        let requested = n as u128 * (warmup as u128 + config.slots as u128);
        if requested > config.budget {
            return Err(Error::BudgetExceeded {
                requested,
                budget: config.budget,
            });
        }

        let ages = initial_ages(n, gamma, config.init, config.seed);
        let arrivals = policy.arrival_rate.is_some();
        let origin: Vec<i64> = ages.iter().map(|&a| -(a as i64)).collect();
        // Arrivals mode starts each source holding a packet of age 1 that
        // it delivered at its last success.
        let dest_origin = if arrivals {
            origin.iter().map(|&o| o - 1).collect()
        } else {
            Vec::new()
        };
        let mut pending: Vec<(u64, u32)> = Vec::new();
        for (i, &a) in ages.iter().enumerate() {
            // initially active sources enter through the queue at slot 0
            pending.push((gamma.saturating_sub(a), i as u32));
        }
        pending.sort_unstable();
        let initially_active = ages.iter().filter(|&&a| a >= gamma).count();
        let estimate = policy
            .estimator()
            .map(|e| e.initial.unwrap_or((initially_active as f64).max(e.floor)));
        let fixed_draw = policy
            .fixed_tau()
            .map(|tau| Bernoulli::new(tau).expect("validated tau"));

        Ok(Self {
            policy,
            gamma,
            streams: SourceStreams::new(config.seed, n, &policy, config.sampling),
            slot: 0,
            window: (warmup, warmup + config.slots),
            origin,
            dest_origin,
            segment_start: vec![warmup; n],
            dest_sum: vec![0; n],
            contention_sum: if arrivals { vec![0; n] } else { Vec::new() },
            successes: vec![0; n],
            pending: pending.into(),
            active: Vec::new(),
            clock: BinaryHeap::new(),
            active_count: 0,
            attempters: Vec::new(),
            estimate,
            histogram: vec![0; n + 1],
            attempts_total: 0,
            rx_total: 0,
            fixed_draw,
            seed: config.seed,
            init: config.init,
        })
    }

    pub fn n(&self) -> usize {
        self.origin.len()
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn policy(&self) -> &PolicyKind {
        &self.policy
    }

    /// Snapshot of the state at the start of the current slot.
    pub fn state(&mut self) -> NetworkState {
        let t = self.slot as i64;
        let contention: Vec<u64> = self.origin.iter().map(|&o| (t - o) as u64).collect();
        let (dest_age, source_age, contention_age) = if self.policy.arrival_rate.is_some() {
            let dest = self.dest_origin.iter().map(|&o| (t - o) as u64).collect();
            let src = (0..self.n())
                .map(|i| (t - self.streams.latest_arrival(i, t - 1)) as u64)
                .collect();
            (dest, Some(src), Some(contention))
        } else {
            (contention, None, None)
        };
        NetworkState {
            dest_age,
            source_age,
            contention_age,
            slot: self.slot,
            estimate: self.estimate,
        }
    }

    /// Advances one slot and returns its feedback.
    pub fn step(&mut self) -> SlotFeedback {
        let t = self.slot;
        let clock = self.streams.uses_clock();
        while let Some(&(at, src)) = self.pending.front() {
            if at > t {
                break;
            }
            self.pending.pop_front();
            self.active_count += 1;
            if clock {
                let next = t + self.streams.attempt_gap(src as usize);
                self.clock.push(Reverse((next, src)));
            } else {
                self.active.push(src);
            }
        }
        let measuring = t >= self.window.0 && t < self.window.1;
        if measuring {
            self.histogram[self.active_count] += 1;
        }

        self.attempters.clear();
        if clock {
            while let Some(&Reverse((at, src))) = self.clock.peek() {
                if at != t {
                    break;
                }
                self.clock.pop();
                self.attempters.push(src);
            }
        } else {
            let draw = match self.fixed_draw {
                Some(d) => d,
                None => {
                    let tau = EstimatorParams::attempt_probability(self.estimate.unwrap_or(1.0));
                    Bernoulli::new(tau).expect("tau in [0, 1]")
                }
            };
            let mut winner_pos = 0;
            for (pos, &src) in self.active.iter().enumerate() {
                if self.streams.attempt(src as usize, &draw) {
                    self.attempters.push(src);
                    winner_pos = pos;
                }
            }
            if self.attempters.len() == 1 {
                self.active.swap_remove(winner_pos);
            }
        }
        let attempts = self.attempters.len();
        let feedback = SlotFeedback::from_attempts(
            attempts,
            self.attempters.first().copied().unwrap_or(0) as usize,
        );

        if measuring {
            self.attempts_total += attempts as u64;
            self.rx_total += if self.estimate.is_some() {
                self.n() as u64
            } else {
                attempts as u64
            };
        }
        match feedback {
            SlotFeedback::Success(src) => {
                self.active_count -= 1;
                self.close_segment(src, t);
                if measuring {
                    self.successes[src] += 1;
                }
                if self.policy.arrival_rate.is_some() {
                    self.dest_origin[src] = self.streams.latest_arrival(src, t as i64 - 1);
                }
                self.origin[src] = t as i64;
                self.pending.push_back((t + self.gamma, src as u32));
            }
            SlotFeedback::Collision(_) if clock => {
                for k in 0..self.attempters.len() {
                    let src = self.attempters[k];
                    let next = t + 1 + self.streams.attempt_gap(src as usize);
                    self.clock.push(Reverse((next, src)));
                }
            }
            _ => {}
        }
        if let (Some(m), Some(est)) = (self.estimate.as_mut(), self.policy.estimator()) {
            *m = est.update(*m, feedback);
            if est.activation_credit {
                let fresh = self
                    .pending
                    .iter()
                    .take_while(|&&(at, _)| at == t + 1)
                    .count();
                *m += fresh as f64;
            }
        }
        self.slot = t + 1;
        feedback
    }

    /// Adds the ages of `src` over its current segment, up to and including
    /// slot `end`, restricted to the measurement window.
    fn close_segment(&mut self, src: usize, end: u64) {
        let lo = self.segment_start[src].max(self.window.0);
        let hi = end.min(self.window.1 - 1);
        if lo <= hi {
            self.dest_sum[src] += segment_sum(lo, hi, self.dest_origin_of(src));
            if !self.contention_sum.is_empty() {
                self.contention_sum[src] += segment_sum(lo, hi, self.origin[src]);
            }
        }
        self.segment_start[src] = end + 1;
    }

    fn dest_origin_of(&self, src: usize) -> i64 {
        if self.dest_origin.is_empty() {
            self.origin[src]
        } else {
            self.dest_origin[src]
        }
    }

    /// Runs to the end of the measurement window and summarizes it.
    pub fn run(mut self) -> SimReport {
        while self.slot < self.window.1 {
            self.step();
        }
        self.finish()
    }

    fn finish(mut self) -> SimReport {
        let end = self.window.1 - 1;
        for src in 0..self.n() {
            self.close_segment(src, end);
        }
        let slots = self.window.1 - self.window.0;
        let per_slot = |x: i128| x as f64 / slots as f64;
        let avg_aoi_per_source: Vec<f64> = self.dest_sum.iter().map(|&s| per_slot(s)).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let network_avg_aoi = mean(&avg_aoi_per_source);
        let success_count: u64 = self.successes.iter().sum();
        let n = self.n();
        let active_fraction_mean = self
            .histogram
            .iter()
            .enumerate()
            .map(|(m, &c)| m as f64 * c as f64)
            .sum::<f64>()
            / (slots as f64 * n as f64);
        let arrivals = self.policy.arrival_rate.map(|rate| {
            let per_source: Vec<f64> = self.contention_sum.iter().map(|&s| per_slot(s)).collect();
            let network = mean(&per_source);
            ArrivalStats {
                arrival_rate: rate,
                avg_contention_age_per_source: per_source,
                network_avg_contention_age: network,
                source_age_offset: network_avg_aoi - network,
            }
        });
        SimReport {
            policy: self.policy,
            n,
            network_avg_aoi,
            avg_aoi_per_source,
            throughput: success_count as f64 / slots as f64,
            success_count,
            successes_per_source: self.successes,
            active_fraction_mean,
            active_fraction_pmf: self
                .histogram
                .iter()
                .map(|&c| c as f64 / slots as f64)
                .collect(),
            active_count_histogram: self.histogram,
            tx_events_per_slot: self.attempts_total as f64 / slots as f64,
            rx_events_per_slot: self.rx_total as f64 / slots as f64,
            slots_simulated: slots,
            warmup_slots: self.window.0,
            seed: self.seed,
            init: self.init,
            arrivals,
        }
    }
}

/// Sum of `s - origin` for `s` in `lo..=hi`.
fn segment_sum(lo: u64, hi: u64, origin: i64) -> i128 {
    let count = (hi - lo + 1) as i128;
    count * (lo as i128 + hi as i128) / 2 - count * origin as i128
}

fn initial_ages(n: usize, gamma: u64, init: Init, seed: u64) -> Vec<u64> {
    match init {
        Init::AllActive => vec![gamma; n],
        Init::RandomDistinct => {
            let range = gamma.max(n as u64 + 1);
            let mut rng = SourceStreams::init_rng(seed);
            index::sample(&mut rng, range as usize, n)
                .into_vec()
                .into_iter()
                .map(|v| (v as u64 + 1).min(gamma))
                .collect()
        }
    }
}

/// Runs `policy` on `n` sources for `warmup + slots` slots and reports the
/// last `slots`. `warmup = None` uses [`default_warmup`].
pub fn simulate(
    policy: PolicyKind,
    n: usize,
    slots: u64,
    warmup: Option<u64>,
    seed: u64,
    init: Init,
) -> Result<SimReport> {
    let config = SimConfig {
        warmup,
        init,
        ..SimConfig::new(slots, seed)
    };
    simulate_with(policy, n, &config)
}

pub fn simulate_with(policy: PolicyKind, n: usize, config: &SimConfig) -> Result<SimReport> {
    Ok(Simulator::new(policy, n, config)?.run())
}

/// Exogenous-arrivals run; the report carries the split between
/// destination age and time since last success.
pub fn simulate_arrivals(
    policy: PolicyKind,
    n: usize,
    slots: u64,
    warmup: Option<u64>,
    seed: u64,
) -> Result<SimReport> {
    if policy.arrival_rate.is_none() {
        return Err(invalid("arrival_rate", "required for an arrivals run"));
    }
    simulate(policy, n, slots, warmup, seed, Init::RandomDistinct)
}
