use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PolicyParams, Purpose};
use crate::numeric::{ln_success_prob, log_sum_exp};

/// Distribution of the number of active sources `m = 0..=n`, stored as
/// normalized natural-log probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivePmf {
    n: usize,
    log_p: Vec<f64>,
    support_min: usize,
}

impl ActivePmf {
    /// Builds a pmf from unnormalized log weights. Entries equal to
    /// `-inf` carry zero probability.
    pub fn from_log_weights(log_w: Vec<f64>) -> Result<Self> {
        if log_w.is_empty() {
            return Err(Error::Domain("empty pmf".into()));
        }
        let norm = log_sum_exp(&log_w);
        if !norm.is_finite() {
            return Err(Error::Domain("pmf has no finite mass".into()));
        }
        let log_p: Vec<f64> = log_w.iter().map(|&w| w - norm).collect();
        let support_min = log_p
            .iter()
            .position(|&l| l > f64::NEG_INFINITY)
            .unwrap_or(0);
        Ok(Self {
            n: log_p.len() - 1,
            log_p,
            support_min,
        })
    }

    /// Point mass at `m`, for tests and degenerate inputs.
    pub fn point_mass(n: usize, m: usize) -> Self {
        let mut log_p = vec![f64::NEG_INFINITY; n + 1];
        log_p[m] = 0.0;
        Self {
            n,
            log_p,
            support_min: m,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_p(&self) -> &[f64] {
        &self.log_p
    }

    pub fn support_min(&self) -> usize {
        self.support_min
    }

    pub fn prob(&self, m: usize) -> f64 {
        self.log_p.get(m).map_or(0.0, |l| l.exp())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_p.iter().map(|l| l.exp()).collect()
    }

    /// Global argmax; the smallest index wins ties.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (m, &l) in self.log_p.iter().enumerate() {
            if l > self.log_p[best] {
                best = m;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.log_p
            .iter()
            .enumerate()
            .map(|(m, l)| m as f64 * l.exp())
            .sum()
    }

    /// Indices that are local maxima of the pmf (strict rise from the left,
    /// no rise to the right).
    pub fn local_maxima(&self) -> Vec<usize> {
        let lp = &self.log_p;
        (0..=self.n)
            .filter(|&m| {
                let left = m == 0 || lp[m] > lp[m - 1];
                let right = m == self.n || lp[m] >= lp[m + 1];
                left && right && lp[m] > f64::NEG_INFINITY
            })
            .collect()
    }

    /// The pmf conditioned on `lo <= m <= hi`.
    pub fn conditioned(&self, lo: usize, hi: usize) -> Result<Self> {
        let log_w = self
            .log_p
            .iter()
            .enumerate()
            .map(|(m, &l)| {
                if m >= lo && m <= hi {
                    l
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Self::from_log_weights(log_w)
    }

    /// Probability that `|m / n - center| < radius`.
    pub fn mass_within(&self, center: f64, radius: f64) -> f64 {
        let n = self.n as f64;
        self.log_p
            .iter()
            .enumerate()
            .filter(|(m, _)| (*m as f64 / n - center).abs() < radius)
            .map(|(_, l)| l.exp())
            .sum()
    }
}

fn check_ratio_args(params: &PolicyParams, m: usize) -> Result<f64> {
    params.validate(Purpose::Simulation)?;
    if m == 0 || m > params.n {
        return Err(Error::Domain(format!(
            "active count m = {m} outside 1..={}",
            params.n
        )));
    }
    let denom = params.gamma as f64 - 1.0 - params.n as f64 + m as f64;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma - 1 - n + m = {denom} is not positive (gamma = {}, n = {}, m = {m})",
            params.gamma, params.n
        )));
    }
    Ok(denom)
}

/// `ln(P_m / P_{m-1})` for the truncated chain.
pub fn log_pm_ratio(params: &PolicyParams, m: usize) -> Result<f64> {
    let denom = check_ratio_args(params, m)?;
    let tau = params.tau;
    let mf = m as f64;
    // 1 - (m-1) tau (1-tau)^(m-2): the chance that m-1 contenders do not
    // produce a success; always positive for tau < 1.
    let log_no_success_prev = if m == 1 {
        0.0
    } else {
        (-ln_success_prob(m - 1, tau).exp()).ln_1p()
    };
    let log_single = tau.ln() + (mf - 1.0) * (-tau).ln_1p();
    Ok(log_no_success_prev + ((params.n - m + 1) as f64).ln() - mf.ln() - log_single - denom.ln())
}

/// `P_m / P_{m-1}` for the truncated chain.
pub fn pm_ratio(params: &PolicyParams, m: usize) -> Result<f64> {
    log_pm_ratio(params, m).map(f64::exp)
}

/// Closed-form distribution of the number of active sources, accumulated
/// as a running sum of log ratios and normalized with log-sum-exp.
pub fn active_pmf(params: &PolicyParams) -> Result<ActivePmf> {
    let params = params.validate(Purpose::ExactAnalysis)?;
    let mut log_w = Vec::with_capacity(params.n + 1);
    log_w.push(0.0);
    let mut acc = 0.0;
    for m in 1..=params.n {
        acc += log_pm_ratio(&params, m)?;
        log_w.push(acc);
    }
    ActivePmf::from_log_weights(log_w)
}

/// `ln N_m`, the log of the number of recurrent states with `m` active
/// sources: `C(n, m) (gamma-1)! / (gamma-n-1+m)!`.
pub fn log_state_count(n: usize, gamma: u64, m: usize) -> Result<f64> {
    if m > n {
        return Err(Error::Domain(format!("m = {m} exceeds n = {n}")));
    }
    if gamma < (n - m) as u64 + 1 {
        // not enough distinct ages below the threshold
        return Ok(f64::NEG_INFINITY);
    }
    let below = n - m;
    let binom: f64 = (0..m.min(below))
        .map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln())
        .sum();
    // (gamma-1)! / (gamma-1-below)! = prod_{j=0}^{below-1} (gamma-1-j)
    let falling: f64 = (0..below)
        .map(|j| ((gamma - 1 - j as u64) as f64).ln())
        .sum();
    Ok(binom + falling)
}

/// Stationary probability `pi_m = P_m / N_m` of any single recurrent state
/// with `m` active sources.
pub fn per_state_probability(params: &PolicyParams, m: usize) -> Result<f64> {
    let pmf = active_pmf(params)?;
    per_state_probability_from(&pmf, params, m)
}

pub(crate) fn per_state_probability_from(
    pmf: &ActivePmf,
    params: &PolicyParams,
    m: usize,
) -> Result<f64> {
    let log_count = log_state_count(params.n, params.gamma, m)?;
    Ok((pmf.log_p()[m] - log_count).exp())
}

/// Success probability of an active source averaged over the active-count
/// distribution: `sum_m P_m tau (1-tau)^max(m-1, 0)`.
pub fn success_prob_q0(pmf: &ActivePmf, tau: f64) -> f64 {
    let log_one_minus = (-tau).ln_1p();
    pmf.log_p()
        .iter()
        .enumerate()
        .filter(|(_, l)| **l > f64::NEG_INFINITY)
        .map(|(m, &l)| (l + tau.ln() + m.saturating_sub(1) as f64 * log_one_minus).exp())
        .sum()
}
