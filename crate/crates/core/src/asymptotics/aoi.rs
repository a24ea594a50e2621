use serde::Serialize;

use super::roots::{classify_regime, Regime};
use crate::error::{invalid, Result};
use crate::model::AsymptoticParams;

/// Limiting per-source quantities at the selected active fraction `k*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AoiEvaluation {
    /// `lim Delta / n` from the pivot-chain form.
    pub aoi_scaled: f64,
    /// The same limit written in terms of `r` and `k*` only.
    pub aoi_scaled_alt: f64,
    /// Offered load `G = k* alpha`.
    pub g_offered: f64,
    /// `G e^{-G}`.
    pub throughput: f64,
    /// `lim n q0 = alpha e^{-k* alpha}`.
    pub q0_scaled: f64,
    pub k_star: f64,
    pub regime: Regime,
}

/// Both closed forms of the limiting AoI at an arbitrary active fraction
/// `k`: `(r^2 / (2 (r + e^{k a}/a)) + e^{k a}/a, r (k^2 + 1) / (2 (1 - k)))`.
/// They coincide whenever `k` is a root of `f`.
pub fn aoi_forms_at(p: &AsymptoticParams, k: f64) -> (f64, f64) {
    let (r, alpha) = (p.r, p.alpha);
    let inv_q0 = (k * alpha).exp() / alpha;
    let pivot = r * r / (2.0 * (r + inv_q0)) + inv_q0;
    let alt = r * (k * k + 1.0) / (2.0 * (1.0 - k));
    (pivot, alt)
}

pub fn throughput_at_load(g: f64) -> f64 {
    g * (-g).exp()
}

pub fn limiting_aoi(p: &AsymptoticParams) -> Result<AoiEvaluation> {
    let analysis = classify_regime(p)?;
    let k = analysis.k_star;
    let (aoi_scaled, aoi_scaled_alt) = aoi_forms_at(p, k);
    let g = k * p.alpha;
    Ok(AoiEvaluation {
        aoi_scaled,
        aoi_scaled_alt,
        g_offered: g,
        throughput: throughput_at_load(g),
        q0_scaled: p.alpha * (-g).exp(),
        k_star: k,
        regime: analysis.regime,
    })
}

/// Time-average age of a single source whose age climbs deterministically
/// to `gamma` and is then reset with probability `q0` per slot:
/// `gamma (gamma - 1) / (2 (gamma - 1 + 1/q0)) + 1/q0`.
pub fn pivot_chain_aoi(gamma: u64, q0: f64) -> Result<f64> {
    if gamma == 0 {
        return Err(invalid("gamma", "must be at least 1"));
    }
    if !(q0 > 0.0 && q0 <= 1.0) {
        return Err(invalid("q0", format!("must lie in (0, 1], got {q0}")));
    }
    let g = gamma as f64;
    let inv = 1.0 / q0;
    Ok(g * (g - 1.0) / (2.0 * (g - 1.0 + inv)) + inv)
}

/// Average AoI of plain slotted ALOHA with `n` sources attempting with
/// probability `tau`: `1/2 + 1 / (tau (1 - tau)^(n-1))`.
pub fn slotted_aloha_aoi(n: usize, tau: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid("tau", format!("must lie in (0, 1], got {tau}")));
    }
    let success = tau * (1.0 - tau).powf((n - 1) as f64);
    Ok(0.5 + 1.0 / success)
}
