//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Hard cap on subintervals.
pub const MAX_INTERVALS: usize = 1_000_000;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`. A reversed
/// interval returns the negated integral; an empty one returns zero.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_simpson_capped(f, a, b, tol, MAX_INTERVALS)
}

pub fn adaptive_simpson_capped<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson_capped(f, b, a, tol, max_intervals).map(|v| -v);
    }
    const START: usize = 8;
    let h = (b - a) / START as f64;
    let mut stack = Vec::with_capacity(64);
    for i in (0..START).rev() {
        let lo = a + h * i as f64;
        let hi = if i + 1 == START {
            b
        } else {
            a + h * (i + 1) as f64
        };
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        stack.push(Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: simpson(lo, hi, fa, fm, fb),
            tol: tol / START as f64,
        });
    }
    let mut intervals = START;
    let mut total = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let err = left + right - p.whole;
        if err.abs() <= 15.0 * p.tol || m <= p.a || m >= p.b {
            total += left + right + err / 15.0;
            continue;
        }
        intervals += 1;
        if intervals > max_intervals {
            return Err(Error::QuadratureNotConverged {
                lo: a,
                hi: b,
                max_intervals,
            });
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
        });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-11).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = adaptive_simpson(|x| 1.0 / x, 1e-3, 1.0, 1e-10).unwrap();
        assert!((v - 1000f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn orientation_and_empty_interval() {
        assert_eq!(adaptive_simpson(f64::exp, 0.3, 0.3, 1e-10).unwrap(), 0.0);
        let fwd = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        let back = adaptive_simpson(f64::exp, 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(fwd, -back);
    }

    #[test]
    fn cap_is_reported() {
        let err = adaptive_simpson_capped(|x| (1.0 / x).sin(), 1e-4, 1.0, 1e-14, 50).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
