use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{PolicyParams, Purpose};

/// Default cap on the number of states the oracle will build.
pub const STATE_LIMIT: u64 = 100_000;
const CONVERGENCE_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;

/// Age vector of the truncated chain; every entry lies in `1..=gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TruncatedState {
    gamma: u64,
    ages: Vec<u64>,
}

impl TruncatedState {
    pub fn new(ages: Vec<u64>, gamma: u64) -> Result<Self> {
        if gamma == 0 {
            return Err(invalid("gamma", "must be at least 1"));
        }
        if let Some(&bad) = ages.iter().find(|&&a| a == 0 || a > gamma) {
            return Err(invalid("ages", format!("entry {bad} outside 1..={gamma}")));
        }
        Ok(Self { gamma, ages })
    }

    pub fn ages(&self) -> &[u64] {
        &self.ages
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn active_count(&self) -> usize {
        self.ages.iter().filter(|&&a| a == self.gamma).count()
    }

    /// Recurrent iff no two entries share an age below the threshold.
    pub fn is_recurrent(&self) -> bool {
        let mut below: Vec<u64> = self
            .ages
            .iter()
            .copied()
            .filter(|&a| a < self.gamma)
            .collect();
        below.sort_unstable();
        below.windows(2).all(|w| w[0] != w[1])
    }

    pub fn state_type(&self) -> StateType {
        let mut below: Vec<u64> = self
            .ages
            .iter()
            .copied()
            .filter(|&a| a < self.gamma)
            .collect();
        below.sort_unstable();
        StateType {
            active: self.ages.len() - below.len(),
            below,
        }
    }
}

pub fn is_recurrent(state: &TruncatedState) -> bool {
    state.is_recurrent()
}

/// Active count plus the sorted multiset of below-threshold ages.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateType {
    pub active: usize,
    pub below: Vec<u64>,
}

/// Which states the oracle builds the chain over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// Only states with distinct below-threshold ages.
    Recurrent,
    /// All of `{1..gamma}^n`, transient states included.
    Full,
}

/// Stationary vector of the enumerated chain.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    n: usize,
    states: Vec<TruncatedState>,
    probs: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
    iterations: usize,
    residual: f64,
}

impl StationaryDistribution {
    pub fn states(&self) -> &[TruncatedState] {
        &self.states
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// L1 norm of `pi P - pi` at the returned vector.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Probability of `state`; zero for states outside the built space.
    pub fn probability(&self, state: &TruncatedState) -> f64 {
        self.index.get(state.ages()).map_or(0.0, |&i| self.probs[i])
    }

    pub fn to_map(&self) -> BTreeMap<TruncatedState, f64> {
        self.states
            .iter()
            .cloned()
            .zip(self.probs.iter().copied())
            .collect()
    }

    /// Aggregated probability of each active count `m = 0..=n`.
    pub fn active_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (s, p) in self.states.iter().zip(&self.probs) {
            out[s.active_count()] += p;
        }
        out
    }

    /// Largest probability difference between two states of the same type.
    pub fn max_type_spread(&self) -> f64 {
        let mut range: HashMap<StateType, (f64, f64)> = HashMap::new();
        for (s, &p) in self.states.iter().zip(&self.probs) {
            let e = range.entry(s.state_type()).or_insert((p, p));
            e.0 = e.0.min(p);
            e.1 = e.1.max(p);
        }
        range.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }
}

fn count_states(n: usize, gamma: u64, space: StateSpace) -> u64 {
    let cap = u64::MAX as u128;
    let total: u128 = match space {
        StateSpace::Full => (0..n).fold(1u128, |acc, _| (acc * gamma as u128).min(cap)),
        StateSpace::Recurrent => {
            let mut total = 0u128;
            for m in 0..=n {
                let below = n - m;
                if below as u64 > gamma.saturating_sub(1) {
                    continue;
                }
                let mut count = binom(n, m);
                for j in 0..below {
                    count = (count * (gamma - 1 - j as u64) as u128).min(cap);
                }
                total = (total + count).min(cap);
            }
            total
        }
    };
    total.min(cap) as u64
}

fn binom(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128)
}

fn generate(n: usize, gamma: u64, space: StateSpace) -> Vec<Vec<u64>> {
    fn rec(
        prefix: &mut Vec<u64>,
        used: &mut Vec<bool>,
        n: usize,
        gamma: u64,
        space: StateSpace,
        out: &mut Vec<Vec<u64>>,
    ) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for a in 1..=gamma {
            let below = a < gamma;
            if space == StateSpace::Recurrent && below && used[a as usize] {
                continue;
            }
            if below && space == StateSpace::Recurrent {
                used[a as usize] = true;
            }
            prefix.push(a);
            rec(prefix, used, n, gamma, space, out);
            prefix.pop();
            if below && space == StateSpace::Recurrent {
                used[a as usize] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; gamma as usize + 1];
    rec(
        &mut Vec::with_capacity(n),
        &mut used,
        n,
        gamma,
        space,
        &mut out,
    );
    out
}

fn successor(ages: &[u64], gamma: u64, winner: Option<usize>) -> Vec<u64> {
    ages.iter()
        .enumerate()
        .map(|(i, &a)| {
            if Some(i) == winner {
                1
            } else {
                (a + 1).min(gamma)
            }
        })
        .collect()
}

/// Stationary distribution over the recurrent states of the truncated chain.
pub fn enumerate_stationary(params: &PolicyParams) -> Result<StationaryDistribution> {
    enumerate_stationary_over(params, StateSpace::Recurrent)
}

/// Builds the transition structure over `space` and runs power iteration
/// from the uniform vector until successive iterates differ by less than
/// `1e-13` in L1.
pub fn enumerate_stationary_over(
    params: &PolicyParams,
    space: StateSpace,
) -> Result<StationaryDistribution> {
    let params = params.validate(Purpose::Simulation)?;
    let (n, gamma, tau) = (params.n, params.gamma, params.tau);
    let count = count_states(n, gamma, space);
    if count > STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            count,
            limit: STATE_LIMIT,
        });
    }
    if count == 0 {
        return Err(Error::GammaTooSmall { gamma, n });
    }

    let raw = generate(n, gamma, space);
    let index: HashMap<Vec<u64>, usize> = raw
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    // Outgoing transitions per state, in a fixed order.
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::with_capacity(raw.len());
    for ages in &raw {
        let active: Vec<usize> = (0..n).filter(|&i| ages[i] == gamma).collect();
        let m = active.len();
        let single = if m == 0 {
            0.0
        } else {
            tau * (1.0 - tau).powi(m as i32 - 1)
        };
        let mut out = Vec::with_capacity(m + 1);
        for &i in &active {
            let next = successor(ages, gamma, Some(i));
            out.push((index[&next], single));
        }
        let next = successor(ages, gamma, None);
        out.push((index[&next], 1.0 - m as f64 * single));
        edges.push(out);
    }

    let len = raw.len();
    let mut pi = vec![1.0 / len as f64; len];
    let mut next = vec![0.0; len];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        apply(&edges, &pi, &mut next);
        iterations += 1;
        delta = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if delta < CONVERGENCE_TOL {
            break;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    apply(&edges, &pi, &mut next);
    let residual: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
    if delta >= CONVERGENCE_TOL || residual > RESIDUAL_TOL {
        return Err(Error::NotConverged {
            iterations,
            residual,
        });
    }

    let states = raw
        .into_iter()
        .map(|ages| TruncatedState { gamma, ages })
        .collect();
    Ok(StationaryDistribution {
        n,
        states,
        probs: pi,
        index,
        iterations,
        residual,
    })
}

fn apply(edges: &[Vec<(usize, f64)>], pi: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (from, row) in edges.iter().enumerate() {
        let mass = pi[from];
        for &(to, p) in row {
            out[to] += mass * p;
        }
    }
}
