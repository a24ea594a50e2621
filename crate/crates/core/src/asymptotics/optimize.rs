use rayon::prelude::*;
use serde::Serialize;

use super::aoi::{limiting_aoi, AoiEvaluation};
use super::roots::Regime;
use crate::error::{Error, Result};
use crate::model::AsymptoticParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeConstraint {
    /// Only parameters whose `f` has a single root.
    SinglePeakOnly,
    /// Any regime the integral test resolves.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub r_range: (f64, f64),
    pub alpha_range: (f64, f64),
    /// Points per axis of the coarse grid.
    pub grid: usize,
    pub nelder_mead: NelderMeadOptions,
    /// Nelder-Mead restarts from the incumbent; stops early once a restart
    /// no longer improves the objective.
    pub restarts: usize,
    /// Report the best point on a lattice of this spacing near the refined
    /// optimum instead of the refined point itself. `None` keeps the
    /// continuous optimum.
    pub resolution: Option<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            r_range: (1.2, 4.0),
            alpha_range: (1.0, 10.0),
            grid: 200,
            nelder_mead: NelderMeadOptions::default(),
            restarts: 20,
            resolution: Some(0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop when every vertex is within this distance (max-norm) of the best.
    pub param_tol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            param_tol: 1e-4,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    /// Reported optimum (lattice point when a resolution is set).
    pub params: AsymptoticParams,
    pub evaluation: AoiEvaluation,
    /// Nelder-Mead result before any lattice rounding.
    pub continuous: AsymptoticParams,
    pub continuous_aoi: f64,
    pub grid_best: AsymptoticParams,
    pub grid_best_aoi: f64,
    pub objective_evaluations: usize,
}

fn admissible(regime: Regime, constraint: RegimeConstraint) -> bool {
    match constraint {
        RegimeConstraint::Any => true,
        RegimeConstraint::SinglePeakOnly => regime == Regime::SinglePeak,
    }
}

/// Objective for the search: limiting AoI, or `+inf` outside the box, for
/// an excluded regime, or where the regime cannot be decided.
fn objective(x: &[f64], opts: &OptimizerOptions, constraint: RegimeConstraint) -> f64 {
    let (r, alpha) = (x[0], x[1]);
    let in_box = r >= opts.r_range.0
        && r <= opts.r_range.1
        && alpha >= opts.alpha_range.0
        && alpha <= opts.alpha_range.1;
    if !in_box {
        return f64::INFINITY;
    }
    match limiting_aoi(&AsymptoticParams { r, alpha }) {
        Ok(e) if admissible(e.regime, constraint) => e.aoi_scaled,
        _ => f64::INFINITY,
    }
}

/// Minimizes the limiting AoI over the default `(r, alpha)` box.
pub fn optimize_parameters(constraint: Option<RegimeConstraint>) -> Result<Optimum> {
    optimize_parameters_with(constraint, &OptimizerOptions::default())
}

/// Coarse grid over the box, then Nelder-Mead from the best grid point.
/// Grid ties go to the smallest `r`, then the smallest `alpha`.
pub fn optimize_parameters_with(
    constraint: Option<RegimeConstraint>,
    opts: &OptimizerOptions,
) -> Result<Optimum> {
    let constraint = constraint.unwrap_or(RegimeConstraint::Any);
    let g = opts.grid.max(2);
    let axis = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (g - 1) as f64;
    let values: Vec<f64> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let x = [axis(opts.r_range, idx / g), axis(opts.alpha_range, idx % g)];
            objective(&x, opts, constraint)
        })
        .collect();
    let mut best = None::<(usize, f64)>;
    for (idx, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((idx, v));
        }
    }
    let (idx, grid_best_aoi) = best.ok_or(Error::NoFeasiblePoint)?;
    let grid_best = [axis(opts.r_range, idx / g), axis(opts.alpha_range, idx % g)];

    let step = [
        (opts.r_range.1 - opts.r_range.0) / (g - 1) as f64,
        (opts.alpha_range.1 - opts.alpha_range.0) / (g - 1) as f64,
    ];
    let f = |x: &[f64]| objective(x, opts, constraint);
    let mut x = grid_best.to_vec();
    let mut fx = grid_best_aoi;
    let mut evaluations = g * g;
    for _ in 0..=opts.restarts {
        let run = nelder_mead(f, &x, &step, &opts.nelder_mead);
        evaluations += run.evaluations;
        if !run.converged {
            return Err(Error::OptimizerNotConverged {
                r: run.x[0],
                alpha: run.x[1],
                aoi_scaled: run.fx,
            });
        }
        let improved = run.fx < fx - 1e-13;
        if run.fx <= fx {
            x = run.x;
            fx = run.fx;
        }
        if !improved {
            break;
        }
    }
    let continuous = AsymptoticParams {
        r: x[0],
        alpha: x[1],
    };
    let params = match opts.resolution {
        Some(h) if h > 0.0 => {
            let (p, evals) = best_lattice_point(&f, &x, h).ok_or(Error::NoFeasiblePoint)?;
            evaluations += evals;
            p
        }
        _ => continuous,
    };
    let evaluation = limiting_aoi(&params)?;
    Ok(Optimum {
        params,
        evaluation,
        continuous,
        continuous_aoi: fx,
        grid_best: AsymptoticParams {
            r: grid_best[0],
            alpha: grid_best[1],
        },
        grid_best_aoi,
        objective_evaluations: evaluations,
    })
}

/// Lattice radius, in steps, searched around the continuous optimum. The
/// objective is flat along the regime boundary, so the best lattice point
/// can sit a few steps away from the nearest one.
const LATTICE_RADIUS: i64 = 10;

fn best_lattice_point<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    h: f64,
) -> Option<(AsymptoticParams, usize)> {
    let centre = [(x[0] / h).round() as i64, (x[1] / h).round() as i64];
    let mut best = None::<([f64; 2], f64)>;
    let mut evals = 0;
    for i in -LATTICE_RADIUS..=LATTICE_RADIUS {
        for j in -LATTICE_RADIUS..=LATTICE_RADIUS {
            let p = [(centre[0] + i) as f64 * h, (centre[1] + j) as f64 * h];
            let v = f(&p);
            evals += 1;
            if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
                best = Some((p, v));
            }
        }
    }
    best.map(|(p, _)| {
        (
            AsymptoticParams {
                r: p[0],
                alpha: p[1],
            },
            evals,
        )
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). The initial
/// simplex is `x0` plus one vertex offset by `step[i]` along each axis.
/// Infinite objective values are treated as infeasible and rejected.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step[i];
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
    };
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        order(&mut simplex);
        let best = simplex[0].0.clone();
        let spread = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= opts.param_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let (worst, f_worst) = simplex[dim].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[dim - 1].1;

        let reflected = lerp(&centroid, &worst, -1.0);
        let f_ref = eval(&reflected);
        if f_ref < f_best {
            let expanded = lerp(&centroid, &worst, -2.0);
            let f_exp = eval(&expanded);
            simplex[dim] = if f_exp < f_ref {
                (expanded, f_exp)
            } else {
                (reflected, f_ref)
            };
            continue;
        }
        if f_ref < f_second {
            simplex[dim] = (reflected, f_ref);
            continue;
        }
        let (contracted, f_con) = if f_ref < f_worst {
            let c = lerp(&centroid, &reflected, 0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &worst, 0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if f_con < f_worst.min(f_ref)
            || (f_con.is_finite() && f_con <= f_worst && !f_worst.is_finite())
        {
            simplex[dim] = (contracted, f_con);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = lerp(&anchor, &vertex.0, 0.5);
            let fv = eval(&v);
            *vertex = (v, fv);
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        fx,
        iterations,
        evaluations,
        converged,
    }
}
