use serde::Serialize;

use super::f_raw;
use super::quadrature::adaptive_simpson;
use crate::error::{Error, Result};
use crate::model::AsymptoticParams;

const GRID_POINTS: usize = 10_000;
const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1.0 - 1e-6;
const QUAD_TOL: f64 = 1e-10;
/// Integrals smaller than this in magnitude do not decide between peaks.
pub const INDETERMINATE_TOL: f64 = 1e-9;

/// Which peak of the active-count distribution the network concentrates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    SinglePeak,
    DoublePeakLower,
    DoublePeakUpper,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::SinglePeak => "single-peak",
            Regime::DoublePeakLower => "double-peak-lower",
            Regime::DoublePeakUpper => "double-peak-upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootAnalysis {
    /// Roots of `f` in `(0, 1)`, strictly increasing.
    pub roots: Vec<f64>,
    pub regime: Regime,
    /// The root the active fraction concentrates on.
    pub k_star: f64,
    /// Integral of `f` from the smallest to the largest root; present only
    /// when there are three roots.
    pub integral_value: Option<f64>,
    /// Set when an even number of sign changes was found, i.e. a root
    /// touched zero without crossing and the scan saw only part of it.
    pub degenerate: bool,
}

/// `r` implied by a root `k`: at a zero of `f`, `r = e^{k a} (1 - k) / (k a)`.
pub fn root_identity_r(alpha: f64, k: f64) -> f64 {
    let x = k * alpha;
    x.exp() * (1.0 - k) / x
}

fn bisect(r: f64, alpha: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f_raw(r, alpha, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f_raw(r, alpha, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f_raw(r, alpha, lo).abs(), f_raw(r, alpha, hi).abs());
    if a <= b {
        lo
    } else {
        hi
    }
}

/// Every root of `f` on `(0, 1)`, found by a sign-change scan on a uniform
/// grid followed by bisection of each bracket to machine precision.
///
/// `f(0+) = +inf` and `f(1-) = -inf`; if the grid ends have not reached the
/// expected signs yet the scan is extended toward 0 or 1.
pub fn find_roots(p: &AsymptoticParams) -> Result<Vec<f64>> {
    let p = p.validate()?;
    let (r, alpha) = (p.r, p.alpha);
    let step = (GRID_HI - GRID_LO) / (GRID_POINTS - 1) as f64;
    let mut ks: Vec<f64> = (0..GRID_POINTS)
        .map(|i| GRID_LO + step * i as f64)
        .collect();
    *ks.last_mut().unwrap() = GRID_HI;

    // Edge extensions so a crossing squeezed against 0 or 1 is not missed.
    let mut left: Vec<f64> = Vec::new();
    for e in [9, 12, 15] {
        if f_raw(r, alpha, left.first().copied().unwrap_or(ks[0])) > 0.0 {
            break;
        }
        left.insert(0, 10f64.powi(-e));
    }
    for e in [9, 12, 15] {
        if f_raw(r, alpha, *ks.last().unwrap()) < 0.0 {
            break;
        }
        ks.push(1.0 - 10f64.powi(-e));
    }
    left.extend(ks);
    let ks = left;

    let vals: Vec<f64> = ks.iter().map(|&k| f_raw(r, alpha, k)).collect();
    let mut roots = Vec::new();
    for i in 0..ks.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            if roots.last() != Some(&ks[i]) {
                roots.push(ks[i]);
            }
        } else if b != 0.0 && (a > 0.0) != (b > 0.0) {
            roots.push(bisect(r, alpha, ks[i], ks[i + 1]));
        }
    }
    if let (Some(&a), Some(&b)) = (vals.last(), ks.last()) {
        if a == 0.0 && roots.last() != Some(&b) {
            roots.push(b);
        }
    }
    Ok(roots)
}

/// Integral of `f` over `[k_lo, k_hi]` (adaptive Simpson, absolute
/// tolerance `1e-10`). Reversed limits give the negated value.
pub fn integral_f(p: &AsymptoticParams, k_lo: f64, k_hi: f64) -> Result<f64> {
    for k in [k_lo, k_hi] {
        super::f_eval(p, k)?;
    }
    let (r, alpha) = (p.r, p.alpha);
    adaptive_simpson(|k| f_raw(r, alpha, k), k_lo, k_hi, QUAD_TOL)
}

fn is_decreasing_at(r: f64, alpha: f64, k: f64) -> bool {
    let h = 1e-7;
    f_raw(r, alpha, (k - h).max(k * 0.5)) > f_raw(r, alpha, (k + h).min(0.5 * (k + 1.0)))
}

/// Roots plus regime: one root is a single peak; with three roots the sign
/// of the integral of `f` between the outer two selects the lower
/// (negative) or upper (positive) root.
pub fn classify_regime(p: &AsymptoticParams) -> Result<RootAnalysis> {
    let roots = find_roots(p)?;
    match roots.len() {
        3 => {
            let integral = integral_f(p, roots[0], roots[2])?;
            if integral.abs() < INDETERMINATE_TOL {
                return Err(Error::IndeterminateRegime { integral });
            }
            let (regime, k_star) = if integral < 0.0 {
                (Regime::DoublePeakLower, roots[0])
            } else {
                (Regime::DoublePeakUpper, roots[2])
            };
            Ok(RootAnalysis {
                roots,
                regime,
                k_star,
                integral_value: Some(integral),
                degenerate: false,
            })
        }
        1 => Ok(RootAnalysis {
            k_star: roots[0],
            roots,
            regime: Regime::SinglePeak,
            integral_value: None,
            degenerate: false,
        }),
        0 => Err(Error::Domain(format!(
            "no root of f found for r = {}, alpha = {}",
            p.r, p.alpha
        ))),
        _ => {
            // A tangency split the count; keep whichever crossing is a peak.
            let decreasing: Vec<f64> = roots
                .iter()
                .copied()
                .filter(|&k| is_decreasing_at(p.r, p.alpha, k))
                .collect();
            let k_star = *decreasing.first().unwrap_or(&roots[0]);
            Ok(RootAnalysis {
                roots,
                regime: Regime::SinglePeak,
                k_star,
                integral_value: None,
                degenerate: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(r: f64, alpha: f64) -> AsymptoticParams {
        AsymptoticParams { r, alpha }
    }

    #[test]
    fn figure_cases_root_counts() {
        assert_eq!(find_roots(&ap(1.5, 2.0)).unwrap().len(), 1);
        assert_eq!(find_roots(&ap(2.5, 5.0)).unwrap().len(), 3);
    }

    #[test]
    fn roots_are_zeros_and_satisfy_identity() {
        for &(r, a) in &[
            (1.5, 2.0),
            (2.5, 5.0),
            (2.21, 4.69),
            (4.0, 10.0),
            (1.2, 1.0),
        ] {
            let p = ap(r, a);
            let roots = find_roots(&p).unwrap();
            assert!(roots.windows(2).all(|w| w[0] < w[1]));
            for k in roots {
                assert!(f_raw(r, a, k).abs() <= 1e-9, "f({k}) = {}", f_raw(r, a, k));
                let implied = root_identity_r(a, k);
                assert!(((implied - r) / r).abs() <= 1e-8, "{implied} vs {r}");
            }
        }
    }

    #[test]
    fn optimum_double_peak_lower_root() {
        let roots = find_roots(&ap(2.21, 4.69)).unwrap();
        assert_eq!(roots.len(), 3);
        assert!((roots[0] - 0.1915).abs() <= 5e-4, "{roots:?}");
    }

    #[test]
    fn reference_regimes() {
        assert_eq!(
            classify_regime(&ap(1.5, 2.0)).unwrap().regime,
            Regime::SinglePeak
        );
        let ra = classify_regime(&ap(2.21, 4.69)).unwrap();
        assert_eq!(ra.regime, Regime::DoublePeakLower);
        assert!((ra.k_star - 0.1915).abs() <= 5e-4);
        assert!(ra.integral_value.unwrap() < 0.0);
        let ra = classify_regime(&ap(2.17, 4.43)).unwrap();
        assert_eq!(ra.regime, Regime::SinglePeak);
        assert!((ra.k_star - 0.2052).abs() <= 5e-4, "{}", ra.k_star);
    }

    #[test]
    fn upper_root_selected_for_positive_integral() {
        // Slightly larger alpha than the three-root figure case pushes the
        // integral positive.
        let ra = classify_regime(&ap(2.5, 5.0)).unwrap();
        let i = ra.integral_value.unwrap();
        if i > 0.0 {
            assert_eq!(ra.regime, Regime::DoublePeakUpper);
            assert_eq!(ra.k_star, ra.roots[2]);
        } else {
            assert_eq!(ra.regime, Regime::DoublePeakLower);
            assert_eq!(ra.k_star, ra.roots[0]);
        }
    }

    #[test]
    fn integral_orientation() {
        let p = ap(2.21, 4.69);
        assert_eq!(integral_f(&p, 0.3, 0.3).unwrap(), 0.0);
        let fwd = integral_f(&p, 0.2, 0.8).unwrap();
        let back = integral_f(&p, 0.8, 0.2).unwrap();
        assert_eq!(fwd, -back);
    }

    #[test]
    fn single_root_params_have_no_integral() {
        let ra = classify_regime(&ap(1.5, 2.0)).unwrap();
        assert!(ra.integral_value.is_none());
        assert_eq!(ra.roots, vec![ra.k_star]);
    }

    #[test]
    fn rejects_r_not_above_one() {
        assert!(find_roots(&ap(1.0, 2.0)).is_err());
        assert!(classify_regime(&ap(0.8, 2.0)).is_err());
    }
}
