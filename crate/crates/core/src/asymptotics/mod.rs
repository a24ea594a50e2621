//! Large-network limit: the log-ratio function `f(k)`, its roots and the
//! peak-selection rule, the limiting AoI of an active fraction `k*`, and an
//! optimizer over the scaled parameters `(r, alpha)`.

mod aoi;
mod optimize;
pub mod quadrature;
mod roots;

pub use aoi::{
    aoi_forms_at, limiting_aoi, pivot_chain_aoi, slotted_aloha_aoi, throughput_at_load,
    AoiEvaluation,
};
pub use optimize::{
    nelder_mead, optimize_parameters, optimize_parameters_with, NelderMeadOptions,
    NelderMeadResult, OptimizerOptions, Optimum, RegimeConstraint,
};
pub use roots::{
    classify_regime, find_roots, integral_f, root_identity_r, Regime, RootAnalysis,
    INDETERMINATE_TOL,
};

use crate::error::{Error, Result};
use crate::model::AsymptoticParams;

/// `f(k) = ln(e^{k a}/(k a) - 1) + ln(r/(k + r - 1) - 1)`.
///
/// Both logs are rewritten to avoid cancellation: the first as
/// `x - ln x + ln(1 - x e^{-x})` with `x = k a`, the second as
/// `ln(1 - k) - ln(k + r - 1)`.
pub fn f_eval(p: &AsymptoticParams, k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Domain(format!("k = {k} outside (0, 1)")));
    }
    if p.alpha.is_nan() || p.alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha = {} must be positive",
            p.alpha
        )));
    }
    if (k + p.r - 1.0).is_nan() || k + p.r - 1.0 <= 0.0 {
        return Err(Error::Domain(format!(
            "k + r - 1 = {} is not positive; second log argument undefined",
            k + p.r - 1.0
        )));
    }
    Ok(f_raw(p.r, p.alpha, k))
}

#[inline]
pub(crate) fn f_raw(r: f64, alpha: f64, k: f64) -> f64 {
    let x = k * alpha;
    x - x.ln() + (-x * (-x).exp()).ln_1p() + (-k).ln_1p() - (k + r - 1.0).ln()
}
