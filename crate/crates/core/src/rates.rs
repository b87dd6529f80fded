//! Privacy amplification and key-rate formulas.
//!
//! All LM05 rates share the shape
//! `R = −Q_μ·f·H(E_μ) + Σ Q[1 − τ(e)]`, where the sum runs over the
//! photon-number contributions that may yield secret bits. The protocol is
//! deterministic, so no sifting factor appears. Negative rates are returned
//! as they are.

use std::fmt;
use std::str::FromStr;

use crate::channel::{
    error_at, error_i, gain_i, poisson_weight, total_gain_and_qber, yield_at, ChannelParams,
    IntensitySet,
};
use crate::combined::estimate_combined;
use crate::error::{Error, Result};
use crate::finite::{estimate_finite, Y1UpperMode};

/// Error-correction inefficiency assumed throughout.
pub const DEFAULT_F_EC: f64 = 1.22;

/// BB84 basis-sifting factor.
pub const BB84_SIFTING: f64 = 0.5;

fn check_probability(e: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&e) {
        Ok(e)
    } else {
        Err(Error::Domain(e))
    }
}

/// Binary entropy H(e) in bits, with H(0) = H(1) = 0.
pub fn binary_entropy(e: f64) -> Result<f64> {
    check_probability(e).map(entropy_bits)
}

/// Fraction of bits discarded in privacy amplification against individual
/// attacks: log₂(1 + 4e − 4e²) below 1/2 and 1 from there on.
pub fn tau(e: f64) -> Result<f64> {
    check_probability(e).map(tau_bits)
}

fn entropy_bits(e: f64) -> f64 {
    if e <= 0.0 || e >= 1.0 {
        return 0.0;
    }
    -e * e.log2() - (1.0 - e) * (1.0 - e).log2()
}

fn tau_bits(e: f64) -> f64 {
    if e >= 0.5 {
        1.0
    } else {
        (1.0 + 4.0 * e - 4.0 * e * e).log2()
    }
}

/// Secret-bit contributions entering a rate formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Contributions {
    /// `(gain, error)` per photon number.
    PerPhoton(Vec<(f64, f64)>),
    /// Single and double photons lumped into one gain and error.
    Effective { gain: f64, error: f64 },
}

/// Everything a rate formula needs once the bounds are known.
#[derive(Debug, Clone, PartialEq)]
pub struct RateInputs {
    pub q_mu: f64,
    pub e_mu: f64,
    pub contributions: Contributions,
    pub f_ec: f64,
}

impl RateInputs {
    /// −Q_μ·f·H(E_μ) + Σ Q[1 − τ(e)]. Terms with zero gain add nothing.
    pub fn secure_rate(&self) -> f64 {
        let cost = self.q_mu * self.f_ec * entropy_bits(self.e_mu.clamp(0.0, 1.0));
        let term = |(gain, error): (f64, f64)| {
            if gain > 0.0 {
                gain * (1.0 - tau_bits(error.clamp(0.0, 1.0)))
            } else {
                0.0
            }
        };
        let secret: f64 = match &self.contributions {
            Contributions::PerPhoton(terms) => terms.iter().copied().map(term).sum(),
            Contributions::Effective { gain, error } => term((*gain, *error)),
        };
        secret - cost
    }
}

/// Asymptotic (infinitely many decoys) LM05 rate at signal intensity `mu`.
pub fn rate_infinite(params: &ChannelParams, mu: f64, f_ec: f64) -> f64 {
    let (q_mu, e_mu) = total_gain_and_qber(params, mu);
    let terms = (1..=2)
        .filter_map(|i| error_i(params, i).ok().map(|e| (gain_i(params, mu, i), e)))
        .collect();
    RateInputs {
        q_mu,
        e_mu,
        contributions: Contributions::PerPhoton(terms),
        f_ec,
    }
    .secure_rate()
}

/// LM05 rate from the per-photon two-decoy bounds.
///
/// `params` is only consulted for Y₁ of the untampered channel when `mode`
/// is [`Y1UpperMode::Infinite`].
pub fn rate_finite_a(
    obs: &crate::Observables,
    s: &IntensitySet,
    mode: Y1UpperMode,
    params: &ChannelParams,
    f_ec: f64,
) -> Result<f64> {
    let b = estimate_finite(obs, s, mode, params)?;
    let terms = [(b.q1_l, b.e1_u), (b.q2_l, b.e2_u)]
        .into_iter()
        .filter_map(|(q, e)| e.map(|e| (q, e)))
        .collect();
    Ok(RateInputs {
        q_mu: obs.q_mu,
        e_mu: obs.e_mu,
        contributions: Contributions::PerPhoton(terms),
        f_ec,
    }
    .secure_rate())
}

/// LM05 rate from the joint single-plus-double photon bound.
pub fn rate_finite_b(
    obs: &crate::Observables,
    s: &IntensitySet,
    params: &ChannelParams,
    f_ec: f64,
) -> Result<f64> {
    let b = estimate_combined(obs, s, params.e0())?;
    let contributions = match b.eff_err_u {
        Some(error) => Contributions::Effective {
            gain: b.q12_l,
            error,
        },
        None => Contributions::PerPhoton(Vec::new()),
    };
    Ok(RateInputs {
        q_mu: obs.q_mu,
        e_mu: obs.e_mu,
        contributions,
        f_ec,
    }
    .secure_rate())
}

/// Probability that a pulse carries three or more photons.
pub fn multi_photon_probability(mu: f64) -> f64 {
    1.0 - (-mu).exp() * (1.0 + mu + mu * mu / 2.0)
}

/// LM05 rate without decoys.
///
/// Every pulse with three or more photons is conceded to the eavesdropper;
/// the surviving fraction β = (Q_μ − p≥3)/Q_μ carries all observed errors:
/// `R = Q_μ[−f·H(E_μ) + β(1 − τ(E_μ/β))]`.
pub fn rate_nondecoy_lm05(params: &ChannelParams, mu: f64, f_ec: f64) -> f64 {
    let (q_mu, e_mu) = total_gain_and_qber(params, mu);
    let beta = ((q_mu - multi_photon_probability(mu)) / q_mu).max(0.0);
    let secret = if beta > 0.0 {
        beta * (1.0 - tau_bits((e_mu / beta).min(1.0)))
    } else {
        0.0
    };
    q_mu * (secret - f_ec * entropy_bits(e_mu))
}

/// Asymptotic decoy-state BB84 rate over a one-way link of the same length:
/// `R = q{−Q_μ·f·H(E_μ) + Q₁[1 − H(e₁)]}` with q = 1/2.
pub fn rate_bb84_infinite(params: &ChannelParams, mu: f64, f_ec: f64) -> f64 {
    let eta = params.one_way_transmittance();
    let (y0, e0, e_det) = (params.y0(), params.e0(), params.e_det());
    let (q_mu, e_mu) = crate::channel::gain_and_qber_at(y0, e0, e_det, eta, mu);
    let q1 = yield_at(y0, eta, 1) * poisson_weight(mu, 1);
    let single = match error_at(y0, e0, e_det, eta, 1) {
        Ok(e1) => q1 * (1.0 - entropy_bits(e1)),
        Err(_) => 0.0,
    };
    BB84_SIFTING * (single - q_mu * f_ec * entropy_bits(e_mu))
}

/// Selectable key-rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateFormula {
    /// R_∞: perfect knowledge of the single- and double-photon terms.
    Infinite,
    /// R_{1+2}: two decoys, Y₁ᵁ from the untampered channel.
    FiniteAInfinite,
    /// R_U: two decoys, Y₁ᵁ from the gain difference with Y₂ = 0.
    FiniteAGenuine,
    /// R₁₂: two decoys, joint single-plus-double photon bound.
    FiniteB,
    /// R_LM05 without decoys.
    NonDecoy,
    /// Decoy-state BB84 over a one-way link.
    Bb84,
}

impl RateFormula {
    pub const ALL: [RateFormula; 6] = [
        RateFormula::Infinite,
        RateFormula::FiniteAInfinite,
        RateFormula::FiniteAGenuine,
        RateFormula::FiniteB,
        RateFormula::NonDecoy,
        RateFormula::Bb84,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateFormula::Infinite => "infinite",
            RateFormula::FiniteAInfinite => "finite-a-infinite",
            RateFormula::FiniteAGenuine => "finite-a-genuine",
            RateFormula::FiniteB => "finite-b",
            RateFormula::NonDecoy => "non-decoy",
            RateFormula::Bb84 => "bb84",
        }
    }

    /// Whether the formula needs decoy intensities.
    pub fn uses_decoys(self) -> bool {
        matches!(
            self,
            RateFormula::FiniteAInfinite | RateFormula::FiniteAGenuine | RateFormula::FiniteB
        )
    }
}

impl fmt::Display for RateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateFormula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let formula = match key.as_str() {
            "infinite" | "r-inf" => RateFormula::Infinite,
            "finite-a-infinite" | "r-1+2" => RateFormula::FiniteAInfinite,
            "finite-a-genuine" | "r-u" => RateFormula::FiniteAGenuine,
            "finite-b" | "r-12" => RateFormula::FiniteB,
            "non-decoy" | "nondecoy" | "r-lm05" => RateFormula::NonDecoy,
            "bb84" => RateFormula::Bb84,
            _ => {
                let names: Vec<_> = RateFormula::ALL.iter().map(|f| f.name()).collect();
                return Err(format!(
                    "unknown formula `{s}` (expected one of {})",
                    names.join(", ")
                ));
            }
        };
        Ok(formula)
    }
}

/// A rate formula together with the fixed inputs it needs besides μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    pub formula: RateFormula,
    pub nu1: f64,
    pub nu2: f64,
    pub f_ec: f64,
}

impl RateModel {
    pub fn new(formula: RateFormula, nu1: f64, nu2: f64) -> Self {
        Self {
            formula,
            nu1,
            nu2,
            f_ec: DEFAULT_F_EC,
        }
    }

    /// Key rate per signal pulse at intensity `mu` over the channel `params`.
    pub fn rate(&self, params: &ChannelParams, mu: f64) -> Result<f64> {
        let f_ec = self.f_ec;
        match self.formula {
            RateFormula::Infinite => Ok(rate_infinite(params, mu, f_ec)),
            RateFormula::NonDecoy => Ok(rate_nondecoy_lm05(params, mu, f_ec)),
            RateFormula::Bb84 => Ok(rate_bb84_infinite(params, mu, f_ec)),
            decoy => {
                let s = IntensitySet::new(mu, self.nu1, self.nu2)?;
                let obs = crate::channel::observe(params, &s);
                match decoy {
                    RateFormula::FiniteAInfinite => {
                        rate_finite_a(&obs, &s, Y1UpperMode::Infinite, params, f_ec)
                    }
                    RateFormula::FiniteAGenuine => {
                        rate_finite_a(&obs, &s, Y1UpperMode::Genuine, params, f_ec)
                    }
                    _ => rate_finite_b(&obs, &s, params, f_ec),
                }
            }
        }
    }
}

/// One sample of a rate-versus-distance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub distance_km: f64,
    pub mu_used: f64,
    pub rate: f64,
}
