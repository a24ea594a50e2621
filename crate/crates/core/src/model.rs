//! Parameter types shared by the exact, asymptotic and simulation modules.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Finite-network policy: `n` sources, age threshold `gamma` (slots) and
/// per-slot attempt probability `tau` once a source is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub n: usize,
    pub gamma: u64,
    pub tau: f64,
}

/// What a set of [`PolicyParams`] is going to be used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Simulation,
    ExactAnalysis,
}

impl PolicyParams {
    pub fn new(n: usize, gamma: u64, tau: f64) -> Self {
        Self { n, gamma, tau }
    }

    /// Returns the parameters unchanged when they satisfy the constraints of
    /// `purpose`. The closed form additionally needs `gamma >= n + 1`.
    pub fn validate(self, purpose: Purpose) -> Result<Self> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.gamma == 0 {
            return Err(invalid("gamma", "must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid(
                "tau",
                format!("must lie in (0, 1), got {}", self.tau),
            ));
        }
        if purpose == Purpose::ExactAnalysis && self.gamma < self.n as u64 + 1 {
            return Err(Error::GammaTooSmall {
                gamma: self.gamma,
                n: self.n,
            });
        }
        Ok(self)
    }

    /// Scales to the large-network pair `(r, alpha) = (gamma / n, n * tau)`.
    pub fn to_asymptotic(&self) -> AsymptoticParams {
        let n = self.n as f64;
        AsymptoticParams {
            r: self.gamma as f64 / n,
            alpha: n * self.tau,
        }
    }
}

/// Free-standing wrapper matching `PolicyParams::validate`.
pub fn validate_policy(params: PolicyParams, purpose: Purpose) -> Result<PolicyParams> {
    params.validate(purpose)
}

/// Scaled parameters of the large-network limit: `r = gamma / n` and
/// `alpha = n * tau`. The active fraction `k = m / n` is the free variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub r: f64,
    pub alpha: f64,
}

impl AsymptoticParams {
    /// Checked constructor; asymptotic analysis requires `r > 1` so that
    /// `f` is defined on all of `(0, 1)`.
    pub fn new(r: f64, alpha: f64) -> Result<Self> {
        Self { r, alpha }.validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.r.is_finite() && self.r > 1.0) {
            return Err(invalid(
                "r",
                format!("must be finite and > 1, got {}", self.r),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(invalid(
                "alpha",
                format!("must be finite and > 0, got {}", self.alpha),
            ));
        }
        Ok(self)
    }

    /// Finite-`n` policy with `gamma = round(r * n)` (half-up) and `tau = alpha / n`.
    pub fn to_policy(&self, n: usize) -> PolicyParams {
        let nf = n as f64;
        PolicyParams {
            n,
            gamma: round_half_up(self.r * nf).max(1.0) as u64,
            tau: self.alpha / nf,
        }
    }
}

pub(crate) fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

pub fn to_asymptotic(params: PolicyParams) -> AsymptoticParams {
    params.to_asymptotic()
}

/// Outcome of one slot on the collision channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotFeedback {
    Idle,
    /// Exactly one attempt; carries the index of the delivering source.
    Success(usize),
    /// Two or more attempts; all packets lost.
    Collision(usize),
}

impl SlotFeedback {
    pub fn from_attempts(attempts: usize, last_attempter: usize) -> Self {
        match attempts {
            0 => SlotFeedback::Idle,
            1 => SlotFeedback::Success(last_attempter),
            k => SlotFeedback::Collision(k),
        }
    }

    pub fn attempts(&self) -> usize {
        match *self {
            SlotFeedback::Idle => 0,
            SlotFeedback::Success(_) => 1,
            SlotFeedback::Collision(k) => k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_analysis_needs_room_for_distinct_ages() {
        assert!(PolicyParams::new(2, 4, 0.5)
            .validate(Purpose::ExactAnalysis)
            .is_ok());
        let err = PolicyParams::new(2, 2, 0.5)
            .validate(Purpose::ExactAnalysis)
            .unwrap_err();
        assert!(err.to_string().contains("gamma < n+1"), "{err}");
        assert!(PolicyParams::new(2, 2, 0.5)
            .validate(Purpose::Simulation)
            .is_ok());
    }

    #[test]
    fn tau_must_be_open_unit_interval() {
        for tau in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            let err = PolicyParams::new(3, 10, tau)
                .validate(Purpose::Simulation)
                .unwrap_err();
            assert!(matches!(err, Error::InvalidParameter { name: "tau", .. }));
        }
        assert!(PolicyParams::new(0, 10, 0.5)
            .validate(Purpose::Simulation)
            .is_err());
        assert!(PolicyParams::new(3, 0, 0.5)
            .validate(Purpose::Simulation)
            .is_err());
    }

    #[test]
    fn scaling_matches_reference_rows() {
        let a = PolicyParams::new(100, 221, 0.0469).to_asymptotic();
        assert!((a.r - 2.21).abs() < 1e-12 && (a.alpha - 4.69).abs() < 1e-12);
        let a = PolicyParams::new(200, 434, 0.02215).to_asymptotic();
        assert!((a.r - 2.17).abs() < 1e-12 && (a.alpha - 4.43).abs() < 1e-12);
        let a = PolicyParams::new(1, 1, 0.5).to_asymptotic();
        assert_eq!((a.r, a.alpha), (1.0, 0.5));
    }

    #[test]
    fn asymptotic_rejects_r_at_most_one() {
        assert!(AsymptoticParams::new(1.0, 2.0).is_err());
        assert!(AsymptoticParams::new(1.5, 0.0).is_err());
        assert!(AsymptoticParams::new(1.5, 2.0).is_ok());
    }

    #[test]
    fn round_half_up_on_conversion() {
        let p = AsymptoticParams {
            r: 2.205,
            alpha: 4.0,
        }
        .to_policy(200);
        assert_eq!(p.gamma, 441);
        assert_eq!(round_half_up(2.5), 3.0);
        assert_eq!(round_half_up(2.4999), 2.0);
    }

    #[test]
    fn feedback_from_attempt_counts() {
        assert_eq!(SlotFeedback::from_attempts(0, 0), SlotFeedback::Idle);
        assert_eq!(SlotFeedback::from_attempts(1, 7), SlotFeedback::Success(7));
        assert_eq!(
            SlotFeedback::from_attempts(3, 7),
            SlotFeedback::Collision(3)
        );
        assert_eq!(SlotFeedback::Collision(3).attempts(), 3);
    }
}
