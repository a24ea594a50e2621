//! Small numeric helpers shared across modules.

/// `ln(sum(exp(x)))` without overflow; `-inf` for an all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(m tau (1-tau)^(m-1))`, the log probability that exactly one of `m`
/// contenders attempts.
pub fn ln_success_prob(m: usize, tau: f64) -> f64 {
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    (m as f64).ln() + tau.ln() + (m as f64 - 1.0) * (-tau).ln_1p()
}
