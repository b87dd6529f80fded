//! Two-decoy bounds on the single- and double-photon yields and errors.
//!
//! Yields are bounded from below and errors from above using only the
//! observed gains and QBERs of the signal (μ) and the decoys (ν₁ > ν₂).
//! Yield bounds are clamped to [0, 1] and error bounds to [0, 1/2].

use crate::channel::{yield_i, ChannelParams, IntensitySet, Observables};
use crate::error::{Error, Result};

/// Which value stands in for the unknown upper bound on Y₁ when bounding Y₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Y1UpperMode {
    /// Y₁ of the untampered channel model.
    Infinite,
    /// Y₁ that saturates the two-decoy gain difference with Y₂ = 0.
    #[default]
    Genuine,
}

/// Per-photon-number estimates of the first finite-decoy approach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteBounds {
    pub y0_l: f64,
    pub y1_l: f64,
    pub y1_u: f64,
    pub y2_l: f64,
    /// `None` when Y₁ᴸ = 0 and the single-photon error is undefined.
    pub e1_u: Option<f64>,
    /// `None` when Y₂ᴸ = 0.
    pub e2_u: Option<f64>,
    pub q1_l: f64,
    pub q2_l: f64,
}

/// Q·e^ν for each intensity.
pub(crate) struct Scaled {
    pub mu: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl Scaled {
    pub fn gains(obs: &Observables, s: &IntensitySet) -> Self {
        Self {
            mu: obs.q_mu * s.mu().exp(),
            nu1: obs.q_nu1 * s.nu1().exp(),
            nu2: obs.q_nu2 * s.nu2().exp(),
        }
    }

    /// E·Q·e^ν for each intensity.
    pub fn error_gains(obs: &Observables, s: &IntensitySet) -> Self {
        Self {
            mu: obs.e_mu * obs.q_mu * s.mu().exp(),
            nu1: obs.e_nu1 * obs.q_nu1 * s.nu1().exp(),
            nu2: obs.e_nu2 * obs.q_nu2 * s.nu2().exp(),
        }
    }
}

fn distinct_decoys(s: &IntensitySet) -> Result<f64> {
    let d = s.nu1() - s.nu2();
    if d <= 0.0 {
        return Err(Error::InvalidIntensity(format!(
            "decoys must differ, got nu1={} nu2={}",
            s.nu1(),
            s.nu2()
        )));
    }
    Ok(d)
}

fn positive_denominator(d: f64, what: &str) -> Result<f64> {
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::InvalidIntensity(format!(
            "{what} denominator {d} is not positive"
        )))
    }
}

pub(crate) fn clamp_yield(y: f64) -> f64 {
    y.clamp(0.0, 1.0)
}

pub(crate) fn clamp_error(e: f64) -> f64 {
    e.clamp(0.0, 0.5)
}

/// Vacuum-yield lower bound
/// Y₀ᴸ = max{(ν₁Q_ν₂e^ν₂ − ν₂Q_ν₁e^ν₁)/(ν₁ − ν₂), 0}.
pub fn y0_lower(obs: &Observables, s: &IntensitySet) -> Result<f64> {
    let d = distinct_decoys(s)?;
    let g = Scaled::gains(obs, s);
    Ok(clamp_yield((s.nu1() * g.nu2 - s.nu2() * g.nu1) / d))
}

/// Single-photon yield lower bound from the two decoys and the signal.
pub fn y1_lower(obs: &Observables, s: &IntensitySet, y0_l: f64) -> Result<f64> {
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    let denom = positive_denominator(mu * (nu1 - nu2) - nu1 * nu1 + nu2 * nu2, "Y1 lower")?;
    let g = Scaled::gains(obs, s);
    let bracket = g.nu1 - g.nu2 - (nu1 * nu1 - nu2 * nu2) / (mu * mu) * (g.mu - y0_l);
    Ok(clamp_yield(mu / denom * bracket))
}

/// Upper bound on Y₁ used inside the Y₂ lower bound.
///
/// `Genuine` solves Q_ν₁e^ν₁ − Q_ν₂e^ν₂ = Y₁(ν₁−ν₂) + Y₂(ν₁²−ν₂²)/2 with
/// Y₂ = 0; `Infinite` returns the honest-channel Y₁ of `params`.
pub fn y1_upper(
    obs: &Observables,
    s: &IntensitySet,
    mode: Y1UpperMode,
    params: &ChannelParams,
) -> Result<f64> {
    let d = distinct_decoys(s)?;
    Ok(match mode {
        Y1UpperMode::Infinite => yield_i(params, 1),
        Y1UpperMode::Genuine => {
            let g = Scaled::gains(obs, s);
            (g.nu1 - g.nu2) / d
        }
    })
}

/// Double-photon yield lower bound. Subtracts `y1_u`, so it is only a
/// lower bound when `y1_u` really bounds Y₁ from above.
pub fn y2_lower(obs: &Observables, s: &IntensitySet, y0_l: f64, y1_u: f64) -> Result<f64> {
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    let cube = nu1.powi(3) - nu2.powi(3);
    let denom = positive_denominator((nu1 * nu1 - nu2 * nu2) * mu - cube, "Y2 lower")?;
    let g = Scaled::gains(obs, s);
    let y1_coeff = (mu * mu * (nu1 - nu2) - cube) / (mu * mu);
    let multi = cube / mu.powi(3) * (g.mu - y0_l);
    let numer = 2.0 * mu * (g.nu1 - g.nu2 - (y1_u * y1_coeff + multi));
    Ok(clamp_yield(numer / denom))
}

/// E·Q·e^ν differences (ν₁ − ν₂, μ − ν₂) shared by both error bounds.
fn error_differences(obs: &Observables, s: &IntensitySet) -> (f64, f64) {
    let eg = Scaled::error_gains(obs, s);
    (eg.nu1 - eg.nu2, eg.mu - eg.nu2)
}

/// Single-photon error upper bound, capped at 1/2.
pub fn e1_upper(obs: &Observables, s: &IntensitySet, y1_l: f64) -> Result<f64> {
    if y1_l <= 0.0 {
        return Err(Error::DegenerateBound("Y1 lower bound"));
    }
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    let (d_nu, d_mu) = error_differences(obs, s);
    let numer = d_nu * (mu * mu - nu2 * nu2) - d_mu * (nu1 * nu1 - nu2 * nu2);
    let denom = (nu1 - nu2) * (mu * mu - nu2 * nu2) - (mu - nu2) * (nu1 * nu1 - nu2 * nu2);
    Ok(clamp_error(numer / (y1_l * denom)))
}

/// Bracket of the double-photon error bound's denominator,
/// (ν₁²−ν₂²)(μ−ν₂)/2 − (μ²−ν₂²)(ν₁−ν₂)/2 = (ν₁−ν₂)(μ−ν₂)(ν₁−μ)/2 < 0.
pub fn e2_denominator_bracket(s: &IntensitySet) -> f64 {
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    (nu1 * nu1 - nu2 * nu2) / 2.0 * (mu - nu2) - (mu * mu - nu2 * nu2) / 2.0 * (nu1 - nu2)
}

/// Double-photon error upper bound, capped at 1/2. Numerator and bracket
/// are both negative on honest channels.
pub fn e2_upper(obs: &Observables, s: &IntensitySet, y2_l: f64) -> Result<f64> {
    if y2_l <= 0.0 {
        return Err(Error::DegenerateBound("Y2 lower bound"));
    }
    let (mu, nu1, nu2) = (s.mu(), s.nu1(), s.nu2());
    let (d_nu, d_mu) = error_differences(obs, s);
    let numer = d_nu * (mu - nu2) - d_mu * (nu1 - nu2);
    Ok(clamp_error(numer / (y2_l * e2_denominator_bracket(s))))
}

/// All approach-A estimates, plus Q₁ᴸ = Y₁ᴸμe^(−μ) and Q₂ᴸ = Y₂ᴸμ²e^(−μ)/2.
pub fn estimate_finite(
    obs: &Observables,
    s: &IntensitySet,
    mode: Y1UpperMode,
    params: &ChannelParams,
) -> Result<FiniteBounds> {
    let y0_l = y0_lower(obs, s)?;
    let y1_l = y1_lower(obs, s, y0_l)?;
    let y1_u = y1_upper(obs, s, mode, params)?;
    let y2_l = y2_lower(obs, s, y0_l, y1_u)?;
    let e1_u = optional(e1_upper(obs, s, y1_l))?;
    let e2_u = optional(e2_upper(obs, s, y2_l))?;
    let mu = s.mu();
    let emission = (-mu).exp();
    Ok(FiniteBounds {
        y0_l,
        y1_l,
        y1_u,
        y2_l,
        e1_u,
        e2_u,
        q1_l: y1_l * emission * mu,
        q2_l: y2_l * emission * mu * mu / 2.0,
    })
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateBound(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{error_i, observe};

    fn reference_setup(l: f64) -> (ChannelParams, IntensitySet, Observables) {
        let p = ChannelParams::gys(l).unwrap();
        let s = IntensitySet::new(0.45, 0.05, 0.0).unwrap();
        let obs = observe(&p, &s);
        (p, s, obs)
    }

    #[test]
    fn vacuum_decoy_reveals_dark_counts() {
        let (p, s, obs) = reference_setup(20.0);
        assert_eq!(y0_lower(&obs, &s).unwrap(), p.y0());
    }

    #[test]
    fn y0_is_lower_bound_with_two_nonzero_decoys() {
        let p = ChannelParams::gys(20.0).unwrap();
        let s = IntensitySet::new(0.45, 0.05, 0.01).unwrap();
        let obs = observe(&p, &s);
        let y0_l = y0_lower(&obs, &s).unwrap();
        assert!(y0_l <= p.y0());
    }

    #[test]
    fn y0_clamps_negative_quotient() {
        let s = IntensitySet::new(0.45, 0.05, 0.01).unwrap();
        let obs = Observables {
            q_nu1: 1e-2,
            q_nu2: 1e-6,
            ..Default::default()
        };
        assert_eq!(y0_lower(&obs, &s).unwrap(), 0.0);
    }

    #[test]
    fn y1_bounds_bracket_the_honest_yield() {
        let (p, s, obs) = reference_setup(20.0);
        let y0_l = y0_lower(&obs, &s).unwrap();
        let y1_l = y1_lower(&obs, &s, y0_l).unwrap();
        let y1 = yield_i(&p, 1);
        assert!(y1_l <= y1 && y1_l > 0.9 * y1);
        let genuine = y1_upper(&obs, &s, Y1UpperMode::Genuine, &p).unwrap();
        assert!(genuine >= y1);
        assert_eq!(y1_upper(&obs, &s, Y1UpperMode::Infinite, &p).unwrap(), y1);
        let by_hand = (obs.q_nu1 * s.nu1().exp() - p.y0()) / s.nu1();
        assert!((genuine - by_hand).abs() <= 1e-15 * by_hand);
    }

    #[test]
    fn y1_lower_tightens_as_weak_decoy_vanishes() {
        let p = ChannelParams::gys(20.0).unwrap();
        let y1 = yield_i(&p, 1);
        let mut last = 0.0;
        for &nu1 in &[0.2, 0.1, 0.05, 0.01, 1e-3] {
            let s = IntensitySet::new(0.45, nu1, 0.0).unwrap();
            let obs = observe(&p, &s);
            let ratio = y1_lower(&obs, &s, p.y0()).unwrap() / y1;
            assert!(ratio > last && ratio <= 1.0, "nu1={nu1} ratio={ratio}");
            last = ratio;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn blocked_channel_clamps_to_zero() {
        let s = IntensitySet::new(0.45, 0.05, 0.0).unwrap();
        let p = ChannelParams::gys(20.0).unwrap();
        // nothing reaches Bob and there are no dark counts
        let obs = Observables::default();
        let y0_l = y0_lower(&obs, &s).unwrap();
        assert_eq!(y1_lower(&obs, &s, y0_l).unwrap(), 0.0);
        let y1_u = y1_upper(&obs, &s, Y1UpperMode::Genuine, &p).unwrap();
        assert_eq!(y2_lower(&obs, &s, y0_l, y1_u).unwrap(), 0.0);
        let b = estimate_finite(&obs, &s, Y1UpperMode::Genuine, &p).unwrap();
        assert_eq!((b.e1_u, b.e2_u), (None, None));
        assert_eq!((b.q1_l, b.q2_l), (0.0, 0.0));
    }

    #[test]
    fn genuine_upper_bound_leaves_no_double_photon_yield() {
        // with ν₂ = 0 the Y₁ᵁ term absorbs the whole decoy difference
        for &l in &[0.0, 20.0, 60.0] {
            let (p, s, obs) = reference_setup(l);
            let b = estimate_finite(&obs, &s, Y1UpperMode::Genuine, &p).unwrap();
            assert_eq!(b.y2_l, 0.0);
            assert_eq!(b.e2_u, None);
        }
    }

    #[test]
    fn y2_lower_below_honest_yield() {
        let (p, s, obs) = reference_setup(20.0);
        let b = estimate_finite(&obs, &s, Y1UpperMode::Genuine, &p).unwrap();
        assert!(b.y2_l <= yield_i(&p, 2));
        let inf = estimate_finite(&obs, &s, Y1UpperMode::Infinite, &p).unwrap();
        assert!(inf.y2_l >= b.y2_l);
        assert!(inf.y2_l <= yield_i(&p, 2));
    }

    #[test]
    fn error_bounds_dominate_honest_errors() {
        let (p, s, obs) = reference_setup(20.0);
        let b = estimate_finite(&obs, &s, Y1UpperMode::Infinite, &p).unwrap();
        assert!(b.e1_u.unwrap() >= error_i(&p, 1).unwrap());
        assert!(b.e2_u.unwrap() >= error_i(&p, 2).unwrap());
    }

    #[test]
    fn error_free_channel_gives_zero_errors() {
        let p = ChannelParams::new(0.21, 0.045, 0.0, 0.0, 10.0).unwrap();
        let s = IntensitySet::new(0.45, 0.05, 0.0).unwrap();
        let obs = observe(&p, &s);
        let b = estimate_finite(&obs, &s, Y1UpperMode::Infinite, &p).unwrap();
        assert!(b.e1_u.unwrap().abs() < 1e-12);
        assert!(b.e2_u.unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_error_bounds() {
        let (_, s, obs) = reference_setup(20.0);
        assert_eq!(
            e1_upper(&obs, &s, 0.0),
            Err(Error::DegenerateBound("Y1 lower bound"))
        );
        assert!(e2_upper(&obs, &s, 0.0).is_err());
    }

    #[test]
    fn composition_matches_individual_calls() {
        let (p, s, obs) = reference_setup(35.0);
        let b = estimate_finite(&obs, &s, Y1UpperMode::Infinite, &p).unwrap();
        let y0_l = y0_lower(&obs, &s).unwrap();
        let y1_l = y1_lower(&obs, &s, y0_l).unwrap();
        let y1_u = y1_upper(&obs, &s, Y1UpperMode::Infinite, &p).unwrap();
        let y2_l = y2_lower(&obs, &s, y0_l, y1_u).unwrap();
        assert_eq!(b.y0_l, y0_l);
        assert_eq!(b.y1_l, y1_l);
        assert_eq!(b.y1_u, y1_u);
        assert_eq!(b.y2_l, y2_l);
        assert_eq!(b.e1_u, Some(e1_upper(&obs, &s, y1_l).unwrap()));
        assert_eq!(b.e2_u, Some(e2_upper(&obs, &s, y2_l).unwrap()));
        assert_eq!(b.q1_l, y1_l * (-0.45f64).exp() * 0.45);
    }

    #[test]
    fn e2_bracket_factorizes() {
        for &(mu, nu1, nu2) in &[(0.45, 0.05, 0.0), (0.9, 0.3, 0.1), (0.2, 0.1, 0.05)] {
            let s = IntensitySet::new(mu, nu1, nu2).unwrap();
            let b = e2_denominator_bracket(&s);
            let f = (nu1 - nu2) * (mu - nu2) * (nu1 - mu) / 2.0;
            assert!(b < 0.0);
            assert!((b - f).abs() < 1e-15);
        }
    }
}
