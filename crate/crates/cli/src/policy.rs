use agethresh_core::sim::{EstimatorParams, PolicyKind};
use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    /// Threshold-ALOHA.
    Ta,
    /// Slotted ALOHA.
    Sa,
    /// Slotted ALOHA from its closed-form AoI, no simulation.
    SaFormula,
    /// Age-threshold thinning with a stabilized attempt probability.
    Stabilized,
}

impl PolicyName {
    pub fn label(self) -> &'static str {
        match self {
            PolicyName::Ta => "ta",
            PolicyName::Sa => "sa",
            PolicyName::SaFormula => "sa-formula",
            PolicyName::Stabilized => "stabilized",
        }
    }
}

/// Policy parameters, given either directly or scaled by `n`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PolicyArgs {
    /// Age threshold in slots; overrides --r.
    #[arg(long, value_parser = crate::parse::count)]
    pub gamma: Option<u64>,
    /// Attempt probability; overrides --alpha.
    #[arg(long, value_parser = crate::parse::real)]
    pub tau: Option<f64>,
    /// Threshold over n (default 2.21 for ta, 2.2 for stabilized).
    #[arg(long, value_parser = crate::parse::real)]
    pub r: Option<f64>,
    /// Attempt probability times n (default 4.69 for ta, 1 for sa).
    #[arg(long, value_parser = crate::parse::real)]
    pub alpha: Option<f64>,
    /// Per-slot packet arrival probability; enables exogenous arrivals.
    #[arg(long, value_parser = crate::parse::real)]
    pub arrival_rate: Option<f64>,
    /// Disable the stabilized estimator's activation credit.
    #[arg(long)]
    pub no_activation_credit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    pub gamma: u64,
    pub tau: Option<f64>,
    pub kind: PolicyKind,
}

impl PolicyArgs {
    pub fn resolve(&self, name: PolicyName, n: usize) -> Result<Resolved> {
        if n == 0 {
            bail!("n must be >= 1");
        }
        let scaled = |x: f64| (x * n as f64 + 0.5).floor().max(1.0) as u64;
        let gamma = |default_r: f64| {
            self.gamma
                .unwrap_or_else(|| scaled(self.r.unwrap_or(default_r)))
        };
        let tau = |default_alpha: f64| {
            self.tau
                .unwrap_or(self.alpha.unwrap_or(default_alpha) / n as f64)
        };
        let (gamma, tau, mut kind) = match name {
            PolicyName::Ta => {
                let (g, t) = (gamma(2.21), tau(4.69));
                (g, Some(t), PolicyKind::threshold(g, t))
            }
            PolicyName::Sa | PolicyName::SaFormula => {
                let t = tau(1.0);
                (1, Some(t), PolicyKind::slotted(t))
            }
            PolicyName::Stabilized => {
                let g = gamma(2.2);
                let est = EstimatorParams {
                    activation_credit: !self.no_activation_credit,
                    ..Default::default()
                };
                (g, None, PolicyKind::stabilized(g, est))
            }
        };
        kind.arrival_rate = self.arrival_rate;
        kind.validate()?;
        Ok(Resolved { gamma, tau, kind })
    }
}
