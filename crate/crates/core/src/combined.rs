//! Joint lower bound on Y₁ + Y₂ and the effective single-plus-double photon
//! gain and error derived from it.

use crate::channel::{IntensitySet, Observables};
use crate::error::{Error, Result};
use crate::finite::{clamp_error, y0_lower, y1_lower, Scaled};

/// Estimates of the second finite-decoy approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedBounds {
    pub y12_l: f64,
    pub q12_l: f64,
    /// `None` when the effective gain bound is zero.
    pub eff_err_u: Option<f64>,
}

/// Lower bound on Y₁ + Y₂, reusing Y₁ᴸ for the single-photon remainder.
pub fn y12_lower(obs: &Observables, s: &IntensitySet, y0_l: f64, y1_l: f64) -> Result<f64> {
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    let cube = nu1.powi(3) - nu2.powi(3);
    let denom = nu1 - nu2 - cube / (2.0 * mu);
    if denom <= 0.0 {
        return Err(Error::InvalidIntensity(format!(
            "Y1+Y2 lower denominator {denom} is not positive"
        )));
    }
    let g = Scaled::gains(obs, s);
    let single = y1_l * mu - y1_l * mu * mu / 2.0;
    let numer = g.nu1 - g.nu2 - cube / mu.powi(3) * (g.mu - y0_l - single);
    Ok((numer / denom).clamp(0.0, 2.0))
}

/// Effective gain lower bound [(Y₁+Y₂)ᴸμ²/2 + Y₁ᴸ(μ − μ²/2)]·e^(−μ).
///
/// The Y₁ᴸ term changes sign at μ = 2.
pub fn q12_lower(y12_l: f64, y1_l: f64, mu: f64) -> f64 {
    let value = (y12_l / 2.0 * mu * mu + (y1_l * mu - y1_l * mu * mu / 2.0)) * (-mu).exp();
    value.max(0.0)
}

/// Effective error upper bound (E_μQ_μ − e₀Y₀ᴸe^(−μ))/𝒬₁₂ᴸ, capped at 1/2.
///
/// `e0` is the background error rate of dark counts.
pub fn eff_error_upper(
    obs: &Observables,
    s: &IntensitySet,
    y0_l: f64,
    q12_l: f64,
    e0: f64,
) -> Result<f64> {
    if q12_l <= 0.0 {
        return Err(Error::DegenerateBound("effective gain lower bound"));
    }
    let numer = obs.e_mu * obs.q_mu - e0 * y0_l * (-s.mu()).exp();
    Ok(clamp_error(numer / q12_l))
}

/// All approach-B estimates.
pub fn estimate_combined(obs: &Observables, s: &IntensitySet, e0: f64) -> Result<CombinedBounds> {
    let y0_l = y0_lower(obs, s)?;
    let y1_l = y1_lower(obs, s, y0_l)?;
    let y12_l = y12_lower(obs, s, y0_l, y1_l)?;
    let q12_l = q12_lower(y12_l, y1_l, s.mu());
    let eff_err_u = match eff_error_upper(obs, s, y0_l, q12_l, e0) {
        Ok(e) => Some(e),
        Err(Error::DegenerateBound(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CombinedBounds {
        y12_l,
        q12_l,
        eff_err_u,
    })
}
