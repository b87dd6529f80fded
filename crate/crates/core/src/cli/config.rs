//! Flat `key = value` run configuration.
//!
//! Values come from (lowest to highest priority) built-in defaults, a config
//! file and command-line flags. Every value is validated when the
//! configuration is built; errors name the file line or flag at fault.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::channel::{ChannelParams, IntensitySet, DEFAULT_E0};
use crate::optimize::{OptimizeSpec, DEFAULT_MU_MAX, DEFAULT_MU_TOLERANCE};
use crate::rates::{RateFormula, RateModel, DEFAULT_F_EC};
use crate::sampler::SampleSpec;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "DECOY_LM05_CONFIG";

/// Keys accepted in config files and as `--key value` flags. Per-formula
/// signal intensities use the additional keys `mu_<formula>`.
pub const KEYS: &[&str] = &[
    "alpha",
    "eta_ab",
    "y0",
    "e_det",
    "e0",
    "mu",
    "nu1",
    "nu2",
    "l_start",
    "l_stop",
    "l_step",
    "formula",
    "optimize",
    "seed",
    "pulses",
    "f_ec",
    "threads",
    "l_max",
    "tolerance",
    "mu_min",
    "mu_max",
    "distance",
    "proxy",
    "output",
];

/// Where a raw value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(origin: Option<Origin>, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            origin,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(origin) = &self.origin {
            write!(f, "{origin}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn is_known_key(key: &str) -> bool {
    if KEYS.contains(&key) {
        return true;
    }
    key.strip_prefix("mu_")
        .is_some_and(|f| f.parse::<RateFormula>().is_ok())
}

/// Raw key/value pairs with their origin, later entries overriding earlier.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new(None, None, format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse_str(&text, path)
    }

    /// Parses config text; `path` is only used in error messages.
    pub fn parse_str(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_owned(),
                line: idx + 1,
            };
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::new(
                    Some(origin),
                    None,
                    format!("expected `key = value`, found `{content}`"),
                ));
            };
            raw.insert(key.trim(), value.trim(), origin)?;
        }
        Ok(raw)
    }

    pub fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if !is_known_key(key) {
            return Err(ConfigError::new(Some(origin), Some(key), "unknown key"));
        }
        self.entries
            .insert(key.to_owned(), (value.to_owned(), origin));
        Ok(())
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    fn get(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries.get(key).map(|(v, o)| (v.as_str(), o))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.optional(key)?.unwrap_or(default))
    }

    fn optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, origin)) => v.parse().map(Some).map_err(|e: T::Err| {
                ConfigError::new(
                    Some(origin.clone()),
                    Some(key),
                    format!("invalid value `{v}`: {e}"),
                )
            }),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(false),
            Some((v, origin)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" | "" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(ConfigError::new(
                    Some(origin.clone()),
                    Some(key),
                    format!("expected a boolean, found `{v}`"),
                )),
            },
        }
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.get(key).map(|(_, o)| o.clone()), Some(key), message)
    }
}

/// Validated settings for one CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub channel: ChannelParams,
    pub mu: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub mu_overrides: BTreeMap<RateFormula, f64>,
    pub l_start: f64,
    pub l_stop: f64,
    pub l_step: f64,
    pub formulas: Vec<RateFormula>,
    pub optimize: bool,
    pub seed: u64,
    pub pulses: u64,
    pub f_ec: f64,
    pub threads: Option<usize>,
    pub l_max: f64,
    pub tolerance: f64,
    pub mu_min: Option<f64>,
    pub mu_max: f64,
    pub distance: Option<f64>,
    pub proxy: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(&RawConfig::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let alpha = raw.parsed("alpha", 0.21)?;
        let eta_ab = raw.parsed("eta_ab", 0.045)?;
        let y0 = raw.parsed("y0", 1.7e-6)?;
        let e_det = raw.parsed("e_det", 0.033)?;
        let e0 = raw.parsed("e0", DEFAULT_E0)?;
        let channel = ChannelParams::with_e0(alpha, eta_ab, y0, e_det, e0, 0.0).map_err(|e| {
            let key = match &e {
                crate::Error::InvalidParameter { name, .. } => *name,
                _ => "alpha",
            };
            raw.fail(key, e.to_string())
        })?;

        let mu = raw.parsed("mu", 0.45)?;
        let nu1 = raw.parsed("nu1", 0.05)?;
        let nu2 = raw.parsed("nu2", 0.0)?;

        let formulas = match raw.get("formula") {
            None => vec![RateFormula::Infinite],
            Some((v, origin)) => {
                let mut list = Vec::new();
                for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let f = name
                        .parse::<RateFormula>()
                        .map_err(|e| ConfigError::new(Some(origin.clone()), Some("formula"), e))?;
                    if !list.contains(&f) {
                        list.push(f);
                    }
                }
                if list.is_empty() {
                    return Err(raw.fail("formula", "no formula given"));
                }
                list
            }
        };

        let mut mu_overrides = BTreeMap::new();
        for f in RateFormula::ALL {
            let key = format!("mu_{}", f.name().replace('-', "_"));
            let alt = format!("mu_{}", f.name());
            for k in [key, alt] {
                if let Some(v) = raw.optional::<f64>(&k)? {
                    if !(v > 0.0) {
                        return Err(raw.fail(&k, "signal intensity must be positive"));
                    }
                    mu_overrides.insert(f, v);
                }
            }
        }

        if !(mu > 0.0) {
            return Err(raw.fail("mu", "signal intensity must be positive"));
        }
        if formulas.iter().any(|f| f.uses_decoys()) {
            IntensitySet::new(mu, nu1, nu2).map_err(|e| raw.fail("mu", e.to_string()))?;
            for (f, &m) in &mu_overrides {
                if f.uses_decoys() {
                    IntensitySet::new(m, nu1, nu2).map_err(|e| {
                        raw.fail(&format!("mu_{}", f.name().replace('-', "_")), e.to_string())
                    })?;
                }
            }
        }
        if !(nu1 > nu2 && nu2 >= 0.0 && nu1 + nu2 < 1.0) {
            return Err(raw.fail("nu1", "need nu1 > nu2 >= 0 and nu1 + nu2 < 1"));
        }

        let l_start: f64 = raw.parsed("l_start", 0.0)?;
        let l_stop: f64 = raw.parsed("l_stop", 100.0)?;
        let l_step: f64 = raw.parsed("l_step", 1.0)?;
        if !(l_step > 0.0 && l_step.is_finite()) {
            return Err(raw.fail("l_step", "step must be positive"));
        }
        if !(l_start >= 0.0) {
            return Err(raw.fail("l_start", "distance must be non-negative"));
        }
        if !(l_start <= l_stop && l_stop.is_finite()) {
            return Err(raw.fail("l_stop", "need l_start <= l_stop"));
        }

        let pulses: u64 = raw.parsed("pulses", 1_000_000)?;
        if pulses == 0 {
            return Err(raw.fail("pulses", "need at least one pulse"));
        }
        let f_ec: f64 = raw.parsed("f_ec", DEFAULT_F_EC)?;
        if !(f_ec >= 1.0) {
            return Err(raw.fail("f_ec", "error-correction inefficiency must be >= 1"));
        }
        let threads = raw.optional::<usize>("threads")?.filter(|&t| t > 0);
        let l_max: f64 = raw.parsed("l_max", 300.0)?;
        if !(l_max > 0.0 && l_max.is_finite()) {
            return Err(raw.fail("l_max", "must be positive"));
        }
        let tolerance: f64 = raw.parsed("tolerance", DEFAULT_MU_TOLERANCE)?;
        if !(tolerance > 0.0) {
            return Err(raw.fail("tolerance", "must be positive"));
        }
        let mu_min = raw.optional::<f64>("mu_min")?;
        let mu_max: f64 = raw.parsed("mu_max", DEFAULT_MU_MAX)?;
        if let Some(lo) = mu_min {
            if !(lo > 0.0 && lo < mu_max) {
                return Err(raw.fail("mu_min", "need 0 < mu_min < mu_max"));
            }
        }
        if !(mu_max > 0.0) {
            return Err(raw.fail("mu_max", "must be positive"));
        }
        let distance = raw.optional::<f64>("distance")?;
        if distance.is_some_and(|d| !(d >= 0.0)) {
            return Err(raw.fail("distance", "distance must be non-negative"));
        }

        let config = Self {
            channel,
            mu,
            nu1,
            nu2,
            mu_overrides,
            l_start,
            l_stop,
            l_step,
            formulas,
            optimize: raw.flag("optimize")?,
            seed: raw.parsed("seed", 1)?,
            pulses,
            f_ec,
            threads,
            l_max,
            tolerance,
            mu_min,
            mu_max,
            distance,
            proxy: raw.flag("proxy")?,
            output: raw.optional::<PathBuf>("output")?,
        };
        for &f in &config.formulas {
            config
                .optimize_spec(f)
                .validate()
                .map_err(|e| raw.fail("mu_min", e.to_string()))?;
        }
        Ok(config)
    }

    /// Distances of the sweep, in ascending order.
    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.l_stop - self.l_start) / self.l_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.l_start + k as f64 * self.l_step)
            .collect()
    }

    /// Fixed signal intensity used for `formula` when not optimizing.
    pub fn mu_for(&self, formula: RateFormula) -> f64 {
        self.mu_overrides.get(&formula).copied().unwrap_or(self.mu)
    }

    pub fn rate_model(&self, formula: RateFormula) -> RateModel {
        RateModel {
            f_ec: self.f_ec,
            ..RateModel::new(formula, self.nu1, self.nu2)
        }
    }

    pub fn optimize_spec(&self, formula: RateFormula) -> OptimizeSpec {
        let spec = OptimizeSpec::new(self.rate_model(formula)).with_tolerance(self.tolerance);
        let lo = self.mu_min.unwrap_or(spec.mu_min);
        spec.with_interval(lo, self.mu_max)
    }

    pub fn sample_spec(&self, seed: u64) -> SampleSpec {
        SampleSpec::new(self.pulses, seed).expect("pulses validated at parse time")
    }

    pub fn intensities(&self) -> Result<IntensitySet, crate::Error> {
        IntensitySet::new(self.mu, self.nu1, self.nu2)
    }
}
