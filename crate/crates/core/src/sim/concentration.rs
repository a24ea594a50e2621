use rayon::prelude::*;
use serde::Serialize;

use super::engine::{simulate_with, SimConfig};
use super::policy::PolicyKind;
use crate::asymptotics::classify_regime;
use crate::error::{invalid, Result};
use crate::model::AsymptoticParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub n: usize,
    pub gamma: u64,
    pub tau: f64,
    pub k_star: f64,
    /// Half-width `c * n^(-1/3)` of the band around `k_star`.
    pub radius: f64,
    /// Fraction of measured slots with `|m/n - k_star| < radius`.
    pub probability: f64,
    pub slots_outside: u64,
    pub slots: u64,
}

/// Empirical probability that the active fraction lies within
/// `c * n^(-1/3)` of the selected root, for each `n` (RandomDistinct start,
/// default warmup).
pub fn concentration_test(
    params: &AsymptoticParams,
    sizes: &[usize],
    c: f64,
    slots: u64,
    seed: u64,
) -> Result<Vec<ConcentrationPoint>> {
    concentration_test_with(params, sizes, c, &SimConfig::new(slots, seed))
}

/// As [`concentration_test`], with the simulation settings spelled out.
/// Sizes run in parallel.
pub fn concentration_test_with(
    params: &AsymptoticParams,
    sizes: &[usize],
    c: f64,
    config: &SimConfig,
) -> Result<Vec<ConcentrationPoint>> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid("c", format!("must be positive, got {c}")));
    }
    let k_star = classify_regime(params)?.k_star;
    sizes
        .par_iter()
        .map(|&n| {
            let policy = params.to_policy(n);
            let kind = PolicyKind::threshold(policy.gamma, policy.tau);
            let report = simulate_with(kind, n, config)?;
            let radius = c * (n as f64).powf(-1.0 / 3.0);
            let slots_outside: u64 = report
                .active_count_histogram
                .iter()
                .enumerate()
                .filter(|&(m, _)| (m as f64 / n as f64 - k_star).abs() >= radius)
                .map(|(_, &count)| count)
                .sum();
            let slots = report.slots_simulated;
            Ok(ConcentrationPoint {
                n,
                gamma: policy.gamma,
                tau: policy.tau,
                k_star,
                radius,
                probability: (slots - slots_outside) as f64 / slots as f64,
                slots_outside,
                slots,
            })
        })
        .collect()
}
