//! Monte-Carlo sessions with finite pulse counts.
//!
//! Each pulse draws a photon number from Poisson(intensity), clicks with the
//! yield Yₙ of that photon number and, given a click, is in error with
//! probability eₙ. Randomness comes from ChaCha8 (`rand_chacha`), which is
//! specified independently of platform and word size. Pulses are split into
//! shards of [`SHARD_PULSES`]; shard `k` of stream `s` uses the ChaCha
//! stream `(s << 32) | k` of the session seed, so a parallel run is
//! bit-identical to a sequential one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::channel::{error_at, yield_at, ChannelParams, IntensitySet, Observables};
use crate::error::{Error, Result};

/// Pulses simulated by one RNG stream.
pub const SHARD_PULSES: u64 = 1 << 16;

/// Photon numbers with a precomputed yield/error table.
const TABLE_LEN: usize = 64;

/// Pulse count and seed of a simulated session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pulses_per_intensity: u64,
    seed: u64,
}

impl SampleSpec {
    pub fn new(pulses_per_intensity: u64, seed: u64) -> Result<Self> {
        if pulses_per_intensity == 0 {
            return Err(Error::InvalidParameter {
                name: "pulses",
                value: 0.0,
                reason: "at least one pulse per intensity is required",
            });
        }
        Ok(Self {
            pulses_per_intensity,
            seed,
        })
    }

    pub fn pulses_per_intensity(&self) -> u64 {
        self.pulses_per_intensity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Raw tallies for one intensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub pulses: u64,
    pub detections: u64,
    pub errors: u64,
}

impl Counts {
    pub fn gain(&self) -> f64 {
        self.detections as f64 / self.pulses as f64
    }

    /// Error fraction among detections; 0 when nothing was detected.
    pub fn qber(&self) -> f64 {
        if self.detections == 0 {
            0.0
        } else {
            self.errors as f64 / self.detections as f64
        }
    }

    pub fn no_detections(&self) -> bool {
        self.detections == 0
    }

    fn merge(self, other: Counts) -> Counts {
        Counts {
            pulses: self.pulses + other.pulses,
            detections: self.detections + other.detections,
            errors: self.errors + other.errors,
        }
    }
}

struct PhotonTable {
    eta: f64,
    y0: f64,
    e0: f64,
    e_det: f64,
    yields: [f64; TABLE_LEN],
    errors: [f64; TABLE_LEN],
}

impl PhotonTable {
    fn new(params: &ChannelParams) -> Self {
        let (eta, y0, e0, e_det) = (
            params.transmittance(),
            params.y0(),
            params.e0(),
            params.e_det(),
        );
        let mut yields = [0.0; TABLE_LEN];
        let mut errors = [0.0; TABLE_LEN];
        for n in 0..TABLE_LEN {
            yields[n] = yield_at(y0, eta, n as u32);
            errors[n] = error_at(y0, e0, e_det, eta, n as u32).unwrap_or(0.0);
        }
        Self {
            eta,
            y0,
            e0,
            e_det,
            yields,
            errors,
        }
    }

    fn lookup(&self, n: u32) -> (f64, f64) {
        match self.yields.get(n as usize) {
            Some(&y) => (y, self.errors[n as usize]),
            None => (
                yield_at(self.y0, self.eta, n),
                error_at(self.y0, self.e0, self.e_det, self.eta, n).unwrap_or(0.0),
            ),
        }
    }
}

fn run_shard(table: &PhotonTable, intensity: f64, pulses: u64, seed: u64, stream: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let poisson = Poisson::new(intensity).ok();
    let mut counts = Counts {
        pulses,
        ..Counts::default()
    };
    for _ in 0..pulses {
        let n = match &poisson {
            Some(p) => p.sample(&mut rng) as u32,
            None => 0,
        };
        let (yield_n, error_n) = table.lookup(n);
        if rng.random::<f64>() < yield_n {
            counts.detections += 1;
            if rng.random::<f64>() < error_n {
                counts.errors += 1;
            }
        }
    }
    counts
}

/// Simulates `pulses` pulses of one intensity on RNG stream group `stream`.
pub fn sample_intensity(
    params: &ChannelParams,
    intensity: f64,
    pulses: u64,
    seed: u64,
    stream: u32,
) -> Counts {
    let table = PhotonTable::new(params);
    let shards = pulses.div_ceil(SHARD_PULSES);
    (0..shards)
        .into_par_iter()
        .map(|k| {
            let len = SHARD_PULSES.min(pulses - k * SHARD_PULSES);
            run_shard(&table, intensity, len, seed, (u64::from(stream) << 32) | k)
        })
        .reduce(Counts::default, Counts::merge)
}

/// Tallies for the signal and both decoys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledSession {
    pub mu: Counts,
    pub nu1: Counts,
    pub nu2: Counts,
}

impl SampledSession {
    pub fn observables(&self) -> Observables {
        Observables {
            q_mu: self.mu.gain(),
            e_mu: self.mu.qber(),
            q_nu1: self.nu1.gain(),
            e_nu1: self.nu1.qber(),
            q_nu2: self.nu2.gain(),
            e_nu2: self.nu2.qber(),
        }
    }

    /// True when some intensity saw no detections, so its QBER was set to 0.
    pub fn has_empty_intensity(&self) -> bool {
        self.mu.no_detections() || self.nu1.no_detections() || self.nu2.no_detections()
    }
}

/// Runs a full session: the signal on stream 0, ν₁ on 1 and ν₂ on 2.
pub fn sample_session(
    params: &ChannelParams,
    intensities: &IntensitySet,
    spec: &SampleSpec,
) -> SampledSession {
    let n = spec.pulses_per_intensity;
    SampledSession {
        mu: sample_intensity(params, intensities.mu(), n, spec.seed, 0),
        nu1: sample_intensity(params, intensities.nu1(), n, spec.seed, 1),
        nu2: sample_intensity(params, intensities.nu2(), n, spec.seed, 2),
    }
}

/// Empirical observables of a simulated session.
pub fn sample_observables(
    params: &ChannelParams,
    intensities: &IntensitySet,
    spec: &SampleSpec,
) -> Observables {
    sample_session(params, intensities, spec).observables()
}
