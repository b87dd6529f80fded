//! Honest two-way fiber channel.
//!
//! A photon makes the round trip Bob → Alice → Bob, so the fiber
//! transmittance carries twice the one-way length. Alice's encoding is taken
//! to be lossless; all apparatus loss is lumped into `eta_ab`.

use crate::error::{Error, Result};

/// Background error rate of a dark count (a random click).
pub const DEFAULT_E0: f64 = 0.5;

/// Highest photon number kept when a Poisson series is summed explicitly.
/// The tail beyond it is below 1e-60 for intensities up to 2.
pub const SERIES_CUTOFF: u32 = 50;

/// Physical description of the link at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    alpha: f64,
    eta_ab: f64,
    y0: f64,
    e_det: f64,
    e0: f64,
    distance_km: f64,
}

impl ChannelParams {
    /// Validated constructor; `e0` defaults to 1/2.
    pub fn new(alpha: f64, eta_ab: f64, y0: f64, e_det: f64, distance_km: f64) -> Result<Self> {
        Self::with_e0(alpha, eta_ab, y0, e_det, DEFAULT_E0, distance_km)
    }

    pub fn with_e0(
        alpha: f64,
        eta_ab: f64,
        y0: f64,
        e_det: f64,
        e0: f64,
        distance_km: f64,
    ) -> Result<Self> {
        check(
            alpha > 0.0 && alpha.is_finite(),
            "alpha",
            alpha,
            "must be positive and finite",
        )?;
        check(
            eta_ab > 0.0 && eta_ab <= 1.0,
            "eta_ab",
            eta_ab,
            "must lie in (0, 1]",
        )?;
        check((0.0..1.0).contains(&y0), "y0", y0, "must lie in [0, 1)")?;
        check(
            (0.0..0.5).contains(&e_det),
            "e_det",
            e_det,
            "must lie in [0, 1/2)",
        )?;
        check((0.0..=1.0).contains(&e0), "e0", e0, "must lie in [0, 1]")?;
        check(
            distance_km >= 0.0 && distance_km.is_finite(),
            "distance_km",
            distance_km,
            "must be non-negative and finite",
        )?;
        Ok(Self {
            alpha,
            eta_ab,
            y0,
            e_det,
            e0,
            distance_km,
        })
    }

    /// GYS experiment parameters at the given distance:
    /// α = 0.21 dB/km, η_AB = 0.045, Y₀ = 1.7e-6, e_det = 0.033, e₀ = 1/2.
    pub fn gys(distance_km: f64) -> Result<Self> {
        Self::new(0.21, 0.045, 1.7e-6, 0.033, distance_km)
    }

    /// Same setup moved to another distance.
    pub fn at_distance(&self, distance_km: f64) -> Result<Self> {
        Self::with_e0(
            self.alpha,
            self.eta_ab,
            self.y0,
            self.e_det,
            self.e0,
            distance_km,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta_ab(&self) -> f64 {
        self.eta_ab
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn e_det(&self) -> f64 {
        self.e_det
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    /// Overall single-photon transmittance η = t·η_AB with the round-trip
    /// fiber loss t = 10^(−α·2l/10).
    pub fn transmittance(&self) -> f64 {
        fiber_transmittance(self.alpha, 2.0 * self.distance_km) * self.eta_ab
    }

    /// Transmittance of a one-way (prepare-and-measure) link of the same
    /// length, used for the BB84 comparison.
    pub fn one_way_transmittance(&self) -> f64 {
        fiber_transmittance(self.alpha, self.distance_km) * self.eta_ab
    }
}

fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// Fiber survival probability over `length_km` at `alpha` dB/km.
pub fn fiber_transmittance(alpha: f64, length_km: f64) -> f64 {
    10f64.powf(-alpha * length_km / 10.0)
}

/// Round-trip transmittance η of the two-way channel.
pub fn transmittance(params: &ChannelParams) -> f64 {
    params.transmittance()
}

/// Probability that at least one of `i` photons survives a channel of
/// transmittance `eta`.
pub fn multi_photon_transmittance(eta: f64, i: u32) -> f64 {
    if i == 0 {
        return 0.0;
    }
    // 1 − (1−η)^i without cancellation for small η
    -(i as f64 * (-eta).ln_1p()).exp_m1()
}

/// Yield Yᵢ = Y₀ + ηᵢ − Y₀ηᵢ for a transmittance `eta`.
pub fn yield_at(y0: f64, eta: f64, i: u32) -> f64 {
    let eta_i = multi_photon_transmittance(eta, i);
    y0 + eta_i - y0 * eta_i
}

/// Error rate eᵢ = (e₀Y₀ + e_det·ηᵢ)/Yᵢ for a transmittance `eta`.
pub fn error_at(y0: f64, e0: f64, e_det: f64, eta: f64, i: u32) -> Result<f64> {
    let yield_i = yield_at(y0, eta, i);
    if yield_i <= 0.0 {
        return Err(Error::DegenerateChannel(i));
    }
    let eta_i = multi_photon_transmittance(eta, i);
    Ok((e0 * y0 + e_det * eta_i) / yield_i)
}

/// Yield of the `i`-photon component on the honest two-way channel.
pub fn yield_i(params: &ChannelParams, i: u32) -> f64 {
    yield_at(params.y0, params.transmittance(), i)
}

/// Error rate of the `i`-photon component on the honest two-way channel.
pub fn error_i(params: &ChannelParams, i: u32) -> Result<f64> {
    error_at(
        params.y0,
        params.e0,
        params.e_det,
        params.transmittance(),
        i,
    )
}

/// Poisson probability of emitting exactly `i` photons at mean `intensity`.
pub fn poisson_weight(intensity: f64, i: u32) -> f64 {
    (1..=i).fold((-intensity).exp(), |p, k| p * intensity / k as f64)
}

/// Gain Qᵢ = Yᵢ·e^(−μ)·μ^i/i! of the `i`-photon component.
pub fn gain_i(params: &ChannelParams, intensity: f64, i: u32) -> f64 {
    yield_i(params, i) * poisson_weight(intensity, i)
}

/// Overall gain and QBER at transmittance `eta`, as the closed-form Poisson
/// sums of the per-photon yields and errors.
pub fn gain_and_qber_at(y0: f64, e0: f64, e_det: f64, eta: f64, intensity: f64) -> (f64, f64) {
    if intensity == 0.0 {
        return (y0, e0);
    }
    // 1 − e^(−ημ)
    let detect = -(-eta * intensity).exp_m1();
    let gain = y0 + detect - y0 * detect;
    let qber = if gain > 0.0 {
        (e0 * y0 + e_det * detect) / gain
    } else {
        e0
    };
    (gain, qber)
}

/// Overall gain Q and QBER E for a source of the given intensity:
/// Q = 1 − (1−Y₀)e^(−ημ), E·Q = e₀Y₀ + e_det(1 − e^(−ημ)).
pub fn total_gain_and_qber(params: &ChannelParams, intensity: f64) -> (f64, f64) {
    gain_and_qber_at(
        params.y0,
        params.e0,
        params.e_det,
        params.transmittance(),
        intensity,
    )
}

/// Signal and decoy mean photon numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySet {
    mu: f64,
    nu1: f64,
    nu2: f64,
}

impl IntensitySet {
    /// Requires μ > ν₁ > ν₂ ≥ 0, ν₁ + ν₂ < μ and ν₁ + ν₂ < 1.
    pub fn new(mu: f64, nu1: f64, nu2: f64) -> Result<Self> {
        if !(mu.is_finite() && nu1.is_finite() && nu2.is_finite()) {
            return Err(Error::InvalidIntensity(format!(
                "non-finite intensity (mu={mu}, nu1={nu1}, nu2={nu2})"
            )));
        }
        if nu2 < 0.0 {
            return Err(Error::InvalidIntensity(format!("nu2 = {nu2} is negative")));
        }
        if !(mu > nu1 && nu1 > nu2) {
            return Err(Error::InvalidIntensity(format!(
                "need mu > nu1 > nu2, got mu={mu}, nu1={nu1}, nu2={nu2}"
            )));
        }
        if nu1 + nu2 >= mu {
            return Err(Error::InvalidIntensity(format!(
                "need nu1 + nu2 < mu, got {} >= {mu}",
                nu1 + nu2
            )));
        }
        if nu1 + nu2 >= 1.0 {
            return Err(Error::InvalidIntensity(format!(
                "need nu1 + nu2 < 1, got {}",
                nu1 + nu2
            )));
        }
        Ok(Self { mu, nu1, nu2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }
}

/// Gains and QBERs measured for the signal and the two decoys.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observables {
    pub q_mu: f64,
    pub e_mu: f64,
    pub q_nu1: f64,
    pub e_nu1: f64,
    pub q_nu2: f64,
    pub e_nu2: f64,
}

/// What an experiment on the honest channel would observe.
pub fn observe(params: &ChannelParams, intensities: &IntensitySet) -> Observables {
    let (q_mu, e_mu) = total_gain_and_qber(params, intensities.mu);
    let (q_nu1, e_nu1) = total_gain_and_qber(params, intensities.nu1);
    let (q_nu2, e_nu2) = total_gain_and_qber(params, intensities.nu2);
    Observables {
        q_mu,
        e_mu,
        q_nu1,
        e_nu1,
        q_nu2,
        e_nu2,
    }
}
