use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::SlotFeedback;

/// Channel access rule applied to sources whose contention age has reached
/// the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccessRule {
    ThresholdAloha {
        gamma: u64,
        tau: f64,
    },
    /// Every source is always eligible; identical to a threshold of 1.
    SlottedAloha {
        tau: f64,
    },
    /// Age-threshold thinning with a collision-feedback estimate of the
    /// active population; eligible sources attempt with `min(1, 1/m̂)`.
    StabilizedThinning {
        gamma: u64,
        estimator: EstimatorParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyKind {
    pub access: AccessRule,
    /// Per-source, per-slot packet arrival probability. `None` is the
    /// generate-at-will model.
    pub arrival_rate: Option<f64>,
}

/// Pseudo-Bayesian estimator for the number of active sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams {
    pub decrement: f64,
    pub increment: f64,
    pub floor: f64,
    /// Add the number of sources crossing the threshold in the next slot,
    /// known to everyone from the success history, after each update.
    pub activation_credit: bool,
    /// Starting estimate; `None` uses the initial number of active sources.
    pub initial: Option<f64>,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            decrement: 1.0,
            increment: 1.0 / (E - 2.0),
            floor: 1.0,
            activation_credit: true,
            initial: None,
        }
    }
}

impl EstimatorParams {
    pub fn update(&self, estimate: f64, feedback: SlotFeedback) -> f64 {
        match feedback {
            SlotFeedback::Collision(_) => estimate + self.increment,
            SlotFeedback::Idle | SlotFeedback::Success(_) => {
                (estimate - self.decrement).max(self.floor)
            }
        }
    }

    pub fn attempt_probability(estimate: f64) -> f64 {
        (1.0 / estimate).min(1.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.decrement) || !ok(self.increment) {
            return Err(invalid("estimator", "steps must be finite and nonnegative"));
        }
        if !(self.floor.is_finite() && self.floor >= 1.0) {
            return Err(invalid(
                "estimator.floor",
                format!("must be >= 1, got {}", self.floor),
            ));
        }
        if let Some(m) = self.initial {
            if !(m.is_finite() && m >= self.floor) {
                return Err(invalid(
                    "estimator.initial",
                    format!("must be >= floor, got {m}"),
                ));
            }
        }
        Ok(())
    }
}

/// One step of the textbook stabilized-ALOHA estimate without arrival
/// credit: Idle/Success decrement by 1 with a floor of 1, Collision adds
/// `1/(e-2)`.
pub fn stabilized_estimator_update(estimate: f64, feedback: SlotFeedback) -> f64 {
    EstimatorParams::default().update(estimate, feedback)
}

impl PolicyKind {
    pub fn threshold(gamma: u64, tau: f64) -> Self {
        Self::from(AccessRule::ThresholdAloha { gamma, tau })
    }

    pub fn slotted(tau: f64) -> Self {
        Self::from(AccessRule::SlottedAloha { tau })
    }

    pub fn stabilized(gamma: u64, estimator: EstimatorParams) -> Self {
        Self::from(AccessRule::StabilizedThinning { gamma, estimator })
    }

    pub fn with_arrivals(mut self, rate: f64) -> Self {
        self.arrival_rate = Some(rate);
        self
    }

    /// Contention age at which a source becomes eligible.
    pub fn gamma(&self) -> u64 {
        match self.access {
            AccessRule::ThresholdAloha { gamma, .. } => gamma,
            AccessRule::SlottedAloha { .. } => 1,
            AccessRule::StabilizedThinning { gamma, .. } => gamma,
        }
    }

    /// Fixed attempt probability, if the rule has one.
    pub fn fixed_tau(&self) -> Option<f64> {
        match self.access {
            AccessRule::ThresholdAloha { tau, .. } | AccessRule::SlottedAloha { tau } => Some(tau),
            AccessRule::StabilizedThinning { .. } => None,
        }
    }

    pub fn estimator(&self) -> Option<&EstimatorParams> {
        match &self.access {
            AccessRule::StabilizedThinning { estimator, .. } => Some(estimator),
            _ => None,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self.access {
            AccessRule::ThresholdAloha { .. } => "threshold-aloha",
            AccessRule::SlottedAloha { .. } => "slotted-aloha",
            AccessRule::StabilizedThinning { .. } => "stabilized-thinning",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma() == 0 {
            return Err(invalid("gamma", "must be >= 1"));
        }
        if let Some(tau) = self.fixed_tau() {
            if !(tau > 0.0 && tau <= 1.0) {
                return Err(invalid("tau", format!("must lie in (0, 1], got {tau}")));
            }
        }
        if let Some(est) = self.estimator() {
            est.validate()?;
        }
        if let Some(rate) = self.arrival_rate {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(invalid(
                    "arrival_rate",
                    format!("must lie in (0, 1], got {rate}"),
                ));
            }
        }
        Ok(())
    }
}

impl From<AccessRule> for PolicyKind {
    fn from(access: AccessRule) -> Self {
        Self {
            access,
            arrival_rate: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_floor_and_collision_step() {
        assert_eq!(stabilized_estimator_update(1.0, SlotFeedback::Idle), 1.0);
        assert_eq!(
            stabilized_estimator_update(1.5, SlotFeedback::Success(3)),
            1.0
        );
        assert_eq!(stabilized_estimator_update(4.0, SlotFeedback::Idle), 3.0);
        let m = stabilized_estimator_update(5.0, SlotFeedback::Collision(2));
        assert!((m - 6.392_211_191_177_332).abs() < 1e-12, "{m}");
    }

    #[test]
    fn attempt_probability_is_capped() {
        assert_eq!(EstimatorParams::attempt_probability(1.0), 1.0);
        assert_eq!(EstimatorParams::attempt_probability(4.0), 0.25);
    }

    #[test]
    fn slotted_threshold_is_one() {
        assert_eq!(PolicyKind::slotted(0.1).gamma(), 1);
        assert_eq!(PolicyKind::slotted(0.1).fixed_tau(), Some(0.1));
    }

    #[test]
    fn validation() {
        assert!(PolicyKind::threshold(0, 0.5).validate().is_err());
        assert!(PolicyKind::threshold(3, 0.0).validate().is_err());
        assert!(PolicyKind::threshold(3, 1.0).validate().is_ok());
        assert!(PolicyKind::threshold(3, 0.5)
            .with_arrivals(0.0)
            .validate()
            .is_err());
        assert!(PolicyKind::threshold(3, 0.5)
            .with_arrivals(1.0)
            .validate()
            .is_ok());
        let bad = EstimatorParams {
            floor: 0.5,
            ..Default::default()
        };
        assert!(PolicyKind::stabilized(3, bad).validate().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let p = PolicyKind::stabilized(10, EstimatorParams::default()).with_arrivals(0.3);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PolicyKind>(&json).unwrap(), p);
    }
}
