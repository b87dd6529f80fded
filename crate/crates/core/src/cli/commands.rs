//! Subcommand bodies. Each writes its complete output into a `String`.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::RunConfig;
use crate::channel::{error_i, gain_i, observe, yield_i, IntensitySet};
use crate::combined::estimate_combined;
use crate::error::Result;
use crate::finite::{estimate_finite, Y1UpperMode};
use crate::optimize::{crossing_distance, cutoff_distance, maximize, optimize_mu};
use crate::rates::{RateFormula, RatePoint};
use crate::sampler::sample_session;

/// Fixed 10-significant-digit scientific notation, independent of locale.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

fn column(f: RateFormula) -> String {
    f.name().replace('-', "_")
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        None => job(),
    }
}

fn rate_point(config: &RunConfig, formula: RateFormula, l: f64) -> Result<RatePoint> {
    let params = config.channel.at_distance(l)?;
    let (mu_used, rate) = if config.optimize {
        let opt = optimize_mu(&params, &config.optimize_spec(formula))?;
        (opt.mu, opt.rate)
    } else {
        let mu = config.mu_for(formula);
        (mu, config.rate_model(formula).rate(&params, mu)?)
    };
    Ok(RatePoint {
        distance_km: l,
        mu_used,
        rate,
    })
}

/// Rate-versus-distance table: one row per distance, a rate and a μ column
/// per formula.
pub fn curve(config: &RunConfig) -> Result<String> {
    let distances = config.distances();
    let rows: Vec<Vec<RatePoint>> = with_pool(config.threads, || {
        distances
            .par_iter()
            .map(|&l| {
                config
                    .formulas
                    .iter()
                    .map(|&f| rate_point(config, f, l))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut out = String::from("distance_km");
    for &f in &config.formulas {
        let _ = write!(out, ",rate_{0},mu_{0}", column(f));
    }
    out.push('\n');
    for (l, points) in distances.iter().zip(&rows) {
        out.push_str(&fmt_num(*l));
        for p in points {
            let _ = write!(out, ",{},{}", fmt_num(p.rate), fmt_num(p.mu_used));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Emission probability of one or two photons, e^(−μ)(μ + μ²/2).
pub fn proxy_objective(mu: f64) -> f64 {
    (-mu).exp() * (mu + mu * mu / 2.0)
}

/// Optimal μ at one distance, one line per formula.
pub fn optimize(config: &RunConfig) -> Result<String> {
    let lo = config.mu_min.unwrap_or(0.01);
    if config.proxy {
        let opt = maximize(proxy_objective, lo, config.mu_max, config.tolerance)?;
        return Ok(format!(
            "objective=proxy mu_star={} rate_star={}\n",
            fmt_num(opt.mu),
            fmt_num(opt.rate)
        ));
    }
    let l = config.distance.unwrap_or(config.l_start);
    let params = config.channel.at_distance(l)?;
    let mut out = String::new();
    for &f in &config.formulas {
        let opt = optimize_mu(&params, &config.optimize_spec(f))?;
        let _ = writeln!(
            out,
            "formula={} distance_km={} mu_star={} rate_star={}",
            f,
            fmt_num(l),
            fmt_num(opt.mu),
            fmt_num(opt.rate)
        );
    }
    Ok(out)
}

/// Cutoff distance of each formula; with exactly two formulas also their
/// cutoff ratio and crossing distance.
pub fn cutoff(config: &RunConfig) -> Result<String> {
    let template = config.channel.at_distance(0.0)?;
    let cutoffs = with_pool(config.threads, || {
        config
            .formulas
            .par_iter()
            .map(|&f| cutoff_distance(&template, &config.optimize_spec(f), config.l_max))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut fields: Vec<String> = config
        .formulas
        .iter()
        .zip(&cutoffs)
        .map(|(f, c)| format!("cutoff_{}={}", column(*f), fmt_num(*c)))
        .collect();
    if let [a, b] = config.formulas[..] {
        fields.push(format!("ratio={}", fmt_num(cutoffs[0] / cutoffs[1])));
        let crossing = crossing_distance(
            &template,
            &config.optimize_spec(a),
            &config.optimize_spec(b),
            config.l_max,
        )?;
        fields.push(format!(
            "crossing_km={}",
            crossing.map_or_else(|| "none".to_owned(), fmt_num)
        ));
    }
    Ok(fields.join(" ") + "\n")
}

pub const SAMPLE_COLUMNS: &[&str] = &[
    "distance_km",
    "seed",
    "q_mu",
    "q_mu_analytic",
    "e_mu",
    "e_mu_analytic",
    "q_nu1",
    "q_nu1_analytic",
    "e_nu1",
    "e_nu1_analytic",
    "q_nu2",
    "q_nu2_analytic",
    "e_nu2",
    "e_nu2_analytic",
    "y0_l",
    "y1_l",
    "y2_l",
    "e1_u",
    "e2_u",
    "y12_l",
    "q12_l",
    "eff_err_u",
    "empty_intensity",
    "violations",
];

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Simulated sessions along the distance sweep, with both estimators run on
/// the sampled observables. `violations` counts bounds that the sampled data
/// pushed past the true channel values.
pub fn sample(config: &RunConfig) -> Result<String> {
    let s = config.intensities()?;
    let distances = config.distances();
    let rows = with_pool(config.threads, || {
        distances
            .iter()
            .enumerate()
            .map(|(k, &l)| sample_row(config, &s, l, config.seed.wrapping_add(k as u64)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = SAMPLE_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn sample_row(config: &RunConfig, s: &IntensitySet, l: f64, seed: u64) -> Result<String> {
    let params = config.channel.at_distance(l)?;
    let session = sample_session(&params, s, &config.sample_spec(seed));
    let obs = session.observables();
    let truth = observe(&params, s);
    let finite = estimate_finite(&obs, s, Y1UpperMode::Genuine, &params)?;
    let combined = estimate_combined(&obs, s, params.e0())?;

    let mu = s.mu();
    let (q1, q2) = (gain_i(&params, mu, 1), gain_i(&params, mu, 2));
    let (e1, e2) = (error_i(&params, 1)?, error_i(&params, 2)?);
    let checks = [
        finite.y0_l <= params.y0(),
        finite.y1_l <= yield_i(&params, 1),
        finite.y2_l <= yield_i(&params, 2),
        finite.e1_u.is_none_or(|e| e >= e1),
        finite.e2_u.is_none_or(|e| e >= e2),
        combined.y12_l <= yield_i(&params, 1) + yield_i(&params, 2),
        combined.q12_l <= q1 + q2,
        combined
            .eff_err_u
            .is_none_or(|e| e >= (e1 * q1 + e2 * q2) / (q1 + q2)),
    ];
    let violations = checks.iter().filter(|ok| !**ok).count();

    let fields = [
        fmt_num(l),
        seed.to_string(),
        fmt_num(obs.q_mu),
        fmt_num(truth.q_mu),
        fmt_num(obs.e_mu),
        fmt_num(truth.e_mu),
        fmt_num(obs.q_nu1),
        fmt_num(truth.q_nu1),
        fmt_num(obs.e_nu1),
        fmt_num(truth.e_nu1),
        fmt_num(obs.q_nu2),
        fmt_num(truth.q_nu2),
        fmt_num(obs.e_nu2),
        fmt_num(truth.e_nu2),
        fmt_num(finite.y0_l),
        fmt_num(finite.y1_l),
        fmt_num(finite.y2_l),
        opt_num(finite.e1_u),
        opt_num(finite.e2_u),
        fmt_num(combined.y12_l),
        fmt_num(combined.q12_l),
        opt_num(combined.eff_err_u),
        u8::from(session.has_empty_intensity()).to_string(),
        violations.to_string(),
    ];
    Ok(fields.join(","))
}
