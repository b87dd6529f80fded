//! Shared draws and independent reference computations for integration tests.
//!
//! The oracles below recompute channel quantities from first principles
//! (explicit powers and explicit photon-number sums) without calling the
//! library's closed forms.

#![allow(dead_code)]

use lm05_decoy::{ChannelParams, IntensitySet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Photon-number truncation of the series oracle.
pub const SERIES_TERMS: u32 = 50;

/// Relative slack for comparing a bound with the truth it should bound.
pub const ROUND_OFF: f64 = 1e-12;

/// Honest channel with α∈[0.15,0.3], l∈[0,60], η_AB∈[0.02,0.1],
/// Y₀∈[1e−7,1e−5] (log-uniform), e_det∈[0.01,0.05].
pub fn honest_channel(rng: &mut ChaCha8Rng) -> ChannelParams {
    let alpha = rng.random_range(0.15..=0.3);
    let l = rng.random_range(0.0..=60.0);
    let eta_ab = rng.random_range(0.02..=0.1);
    let y0 = 10f64.powf(rng.random_range(-7.0..=-5.0));
    let e_det = rng.random_range(0.01..=0.05);
    ChannelParams::new(alpha, eta_ab, y0, e_det, l).expect("draw ranges are valid")
}

/// μ ~ U[0.1, 1.2], ν₁ ~ U(0, 0.9·min(μ,1)), ν₂ = 0 with probability 0.3,
/// else ν₂ ~ U[0, ν₁); rejected until the set is valid.
pub fn intensity_set(rng: &mut ChaCha8Rng) -> IntensitySet {
    loop {
        let mu: f64 = rng.random_range(0.1..=1.2);
        let nu1 = rng.random_range(1e-4..0.9 * mu.min(1.0));
        let nu2 = if rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(0.0..nu1)
        };
        if let Ok(s) = IntensitySet::new(mu, nu1, nu2) {
            return s;
        }
    }
}

pub fn eta(p: &ChannelParams) -> f64 {
    p.eta_ab() * 10f64.powf(-p.alpha() * 2.0 * p.distance_km() / 10.0)
}

pub fn eta_n(eta: f64, n: u32) -> f64 {
    1.0 - (1.0 - eta).powi(n as i32)
}

pub fn yield_n(p: &ChannelParams, n: u32) -> f64 {
    if n == 0 {
        return p.y0();
    }
    let e = eta_n(eta(p), n);
    p.y0() + e - p.y0() * e
}

pub fn error_n(p: &ChannelParams, n: u32) -> f64 {
    if n == 0 {
        return p.e0();
    }
    let e = eta_n(eta(p), n);
    (p.e0() * p.y0() + p.e_det() * e) / yield_n(p, n)
}

/// Poisson weight computed by repeated multiplication.
pub fn poisson(intensity: f64, n: u32) -> f64 {
    let mut w = (-intensity).exp();
    for k in 1..=n {
        w *= intensity / f64::from(k);
    }
    w
}

/// (Q, E) as the photon-number series truncated at [`SERIES_TERMS`].
pub fn series_gain_qber(p: &ChannelParams, intensity: f64) -> (f64, f64) {
    let mut q = 0.0;
    let mut eq = 0.0;
    for n in 0..=SERIES_TERMS {
        let g = poisson(intensity, n) * yield_n(p, n);
        q += g;
        eq += g * error_n(p, n);
    }
    (q, eq / q)
}

/// True single- and double-photon quantities at signal intensity μ.
#[derive(Debug, Clone, Copy)]
pub struct Truth {
    pub y0: f64,
    pub y1: f64,
    pub y2: f64,
    pub e1: f64,
    pub e2: f64,
    pub q12: f64,
    pub eff_err: f64,
}

pub fn truth(p: &ChannelParams, mu: f64) -> Truth {
    let (y1, y2) = (yield_n(p, 1), yield_n(p, 2));
    let (e1, e2) = (error_n(p, 1), error_n(p, 2));
    let q1 = poisson(mu, 1) * y1;
    let q2 = poisson(mu, 2) * y2;
    Truth {
        y0: p.y0(),
        y1,
        y2,
        e1,
        e2,
        q12: q1 + q2,
        eff_err: (e1 * q1 + e2 * q2) / (q1 + q2),
    }
}

/// `bound ≤ truth` up to [`ROUND_OFF`].
pub fn below(bound: f64, truth: f64) -> bool {
    bound <= truth + ROUND_OFF * truth.abs().max(bound.abs())
}

/// `bound ≥ truth` up to [`ROUND_OFF`].
pub fn above(bound: f64, truth: f64) -> bool {
    below(truth, bound)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
