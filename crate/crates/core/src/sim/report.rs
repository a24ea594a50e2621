use serde::{Deserialize, Serialize};

use super::engine::Init;
use super::policy::PolicyKind;

/// Metrics over the measurement window of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub policy: PolicyKind,
    pub n: usize,
    /// Mean of the per-source time-average destination ages.
    pub network_avg_aoi: f64,
    pub avg_aoi_per_source: Vec<f64>,
    /// Successes per slot.
    pub throughput: f64,
    pub success_count: u64,
    pub successes_per_source: Vec<u64>,
    /// Time-average of (active sources) / n.
    pub active_fraction_mean: f64,
    /// Fraction of slots with `m` active sources, `m = 0..=n`.
    pub active_fraction_pmf: Vec<f64>,
    pub active_count_histogram: Vec<u64>,
    /// Transmission attempts per slot.
    pub tx_events_per_slot: f64,
    /// Sources listening to feedback per slot: the attempters for the
    /// fixed-probability rules, every source for the stabilized baseline.
    pub rx_events_per_slot: f64,
    pub slots_simulated: u64,
    pub warmup_slots: u64,
    pub seed: u64,
    pub init: Init,
    pub arrivals: Option<ArrivalStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalStats {
    pub arrival_rate: f64,
    /// Time-average of slots since the last success, per source.
    pub avg_contention_age_per_source: Vec<f64>,
    pub network_avg_contention_age: f64,
    /// `network_avg_aoi - network_avg_contention_age`, an estimate of the
    /// mean age of the packet held at the source.
    pub source_age_offset: f64,
}

impl SimReport {
    pub fn aoi_over_n(&self) -> f64 {
        self.network_avg_aoi / self.n as f64
    }
}
