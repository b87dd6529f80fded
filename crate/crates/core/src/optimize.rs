//! Signal-intensity optimization and distance searches.
//!
//! The rate is maximized over μ by golden-section search on the best
//! bracket of a 16-point grid pre-scan. Rate-versus-μ curves are unimodal
//! in practice; the pre-scan keeps the search on the global peak when they
//! are not.

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::rates::{RateFormula, RateModel};

/// Number of grid points evaluated before the golden-section refinement.
pub const PRESCAN_POINTS: usize = 16;

/// Default absolute tolerance on μ.
pub const DEFAULT_MU_TOLERANCE: f64 = 1e-6;

/// Upper end of the default μ search interval.
pub const DEFAULT_MU_MAX: f64 = 2.0;

/// Distance resolution of cutoff and crossing searches, in km.
pub const DISTANCE_RESOLUTION_KM: f64 = 0.1;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Best point found by [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub mu: f64,
    pub rate: f64,
}

/// Maximizes `f` over `[lo, hi]` to within `tol` in the argument.
pub fn maximize<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Optimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptyInterval { lo, hi });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            value: tol,
            reason: "must be positive",
        });
    }

    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..PRESCAN_POINTS)
        .map(|k| {
            let x = if k == PRESCAN_POINTS - 1 {
                hi
            } else {
                lo + k as f64 * step
            };
            (x, f(x))
        })
        .collect();
    let best = (0..PRESCAN_POINTS)
        .max_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)].0;
    let mut b = grid[(best + 1).min(PRESCAN_POINTS - 1)].0;

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    let mid = 0.5 * (a + b);
    let candidate = Optimum {
        mu: mid,
        rate: f(mid),
    };
    let (gx, gy) = grid[best];
    if gy > candidate.rate {
        Ok(Optimum { mu: gx, rate: gy })
    } else {
        Ok(candidate)
    }
}

/// Search interval, tolerance and rate model for μ optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeSpec {
    pub mu_min: f64,
    pub mu_max: f64,
    pub tolerance: f64,
    pub model: RateModel,
}

impl OptimizeSpec {
    /// Default interval `[max(ν₁+ν₂+1e-6, 0.01), 2]` for decoy formulas and
    /// `[0.01, 2]` otherwise.
    pub fn new(model: RateModel) -> Self {
        let floor = if model.formula.uses_decoys() {
            (model.nu1 + model.nu2 + 1e-6).max(0.01)
        } else {
            0.01
        };
        Self {
            mu_min: floor,
            mu_max: DEFAULT_MU_MAX,
            tolerance: DEFAULT_MU_TOLERANCE,
            model,
        }
    }

    pub fn for_formula(formula: RateFormula, nu1: f64, nu2: f64) -> Self {
        Self::new(RateModel::new(formula, nu1, nu2))
    }

    pub fn with_interval(mut self, mu_min: f64, mu_max: f64) -> Self {
        self.mu_min = mu_min;
        self.mu_max = mu_max;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_min > 0.0 && self.mu_min < self.mu_max) {
            return Err(Error::EmptyInterval {
                lo: self.mu_min,
                hi: self.mu_max,
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                value: self.tolerance,
                reason: "must be positive",
            });
        }
        if self.model.formula.uses_decoys() && self.mu_min <= self.model.nu1 + self.model.nu2 {
            return Err(Error::InvalidIntensity(format!(
                "mu_min = {} must exceed nu1 + nu2 = {}",
                self.mu_min,
                self.model.nu1 + self.model.nu2
            )));
        }
        Ok(())
    }
}

/// Maximizes the selected rate over μ at the distance of `params`.
/// An all-negative rate curve is not an error; the best (negative) value is
/// returned.
pub fn optimize_mu(params: &ChannelParams, spec: &OptimizeSpec) -> Result<Optimum> {
    spec.validate()?;
    // validate() guarantees every μ in the interval forms a valid set, so a
    // failure here is a genuine bug in the caller's model
    let mut failure = None;
    let optimum = maximize(
        |mu| match spec.model.rate(params, mu) {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        spec.mu_min,
        spec.mu_max,
        spec.tolerance,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(optimum),
    }
}

fn optimized_rate(template: &ChannelParams, spec: &OptimizeSpec, l: f64) -> Result<f64> {
    Ok(optimize_mu(&template.at_distance(l)?, spec)?.rate)
}

/// Largest distance in `[0, l_max]` with a positive optimized rate, found by
/// bisection to [`DISTANCE_RESOLUTION_KM`].
pub fn cutoff_distance(template: &ChannelParams, spec: &OptimizeSpec, l_max: f64) -> Result<f64> {
    if optimized_rate(template, spec, 0.0)? <= 0.0 {
        return Err(Error::NoPositiveRate);
    }
    if optimized_rate(template, spec, l_max)? > 0.0 {
        return Ok(l_max);
    }
    let (mut lo, mut hi) = (0.0, l_max);
    while hi - lo > DISTANCE_RESOLUTION_KM {
        let mid = 0.5 * (lo + hi);
        if optimized_rate(template, spec, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Distance at which the optimized curves of `spec_a` and `spec_b` cross.
///
/// Scans `[0, l_max]` in 1 km steps for the first sign change of
/// `rate_a − rate_b`, then bisects to [`DISTANCE_RESOLUTION_KM`]. Returns
/// `None` when the curves coincide at zero distance or never change order.
pub fn crossing_distance(
    template: &ChannelParams,
    spec_a: &OptimizeSpec,
    spec_b: &OptimizeSpec,
    l_max: f64,
) -> Result<Option<f64>> {
    let diff = |l: f64| -> Result<f64> {
        Ok(optimized_rate(template, spec_a, l)? - optimized_rate(template, spec_b, l)?)
    };
    let start = diff(0.0)?;
    if start == 0.0 {
        return Ok(None);
    }
    let steps = l_max.ceil().max(1.0) as usize;
    let mut prev = 0.0;
    for k in 1..=steps {
        let l = (k as f64).min(l_max);
        let d = diff(l)?;
        if d.signum() != start.signum() {
            let (mut lo, mut hi) = (prev, l);
            while hi - lo > DISTANCE_RESOLUTION_KM {
                let mid = 0.5 * (lo + hi);
                if diff(mid)?.signum() == start.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = l;
    }
    Ok(None)
}
