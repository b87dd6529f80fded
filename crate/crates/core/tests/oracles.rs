//! Comparisons against brute-force and independently computed references.

mod common;

use lm05_decoy::channel::{error_i, gain_i, observe, total_gain_and_qber, yield_i};
use lm05_decoy::optimize::{crossing_distance, cutoff_distance, optimize_mu};
use lm05_decoy::rates::RateModel;
use lm05_decoy::sampler::{sample_intensity, sample_session};
use lm05_decoy::{ChannelParams, IntensitySet, OptimizeSpec, RateFormula, SampleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{honest_channel, intensity_set, rel_diff, series_gain_qber, truth};

fn spec(f: RateFormula) -> OptimizeSpec {
    OptimizeSpec::for_formula(f, 0.05, 0.0)
}

#[test]
fn closed_forms_match_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p = honest_channel(&mut rng);
        let mu = rng.random_range(0.01..=2.0);
        let (q, e) = total_gain_and_qber(&p, mu);
        let (qs, es) = series_gain_qber(&p, mu);
        assert!(rel_diff(q, qs) < 1e-10, "{q} vs {qs}");
        assert!(rel_diff(e, es) < 1e-10, "{e} vs {es}");
    }
}

#[test]
fn per_photon_quantities_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let p = honest_channel(&mut rng);
        for n in 1..=10 {
            assert!(rel_diff(yield_i(&p, n), common::yield_n(&p, n)) < 1e-10);
            assert!(rel_diff(error_i(&p, n).unwrap(), common::error_n(&p, n)) < 1e-10);
            let g = common::poisson(0.6, n) * common::yield_n(&p, n);
            assert!(rel_diff(gain_i(&p, 0.6, n), g) < 1e-10);
        }
    }
}

#[test]
fn observables_agree_with_per_field_calls() {
    let p = ChannelParams::gys(20.0).unwrap();
    let s = IntensitySet::new(0.45, 0.05, 0.0).unwrap();
    let obs = observe(&p, &s);
    assert_eq!((obs.q_mu, obs.e_mu), total_gain_and_qber(&p, 0.45));
    assert_eq!((obs.q_nu1, obs.e_nu1), total_gain_and_qber(&p, 0.05));
    assert_eq!((obs.q_nu2, obs.e_nu2), (p.y0(), p.e0()));
}

#[test]
fn optimizer_matches_grid_for_each_smooth_formula() {
    const TOL: f64 = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for formula in [
        RateFormula::Infinite,
        RateFormula::Bb84,
        RateFormula::NonDecoy,
    ] {
        let model = RateModel::new(formula, 0.05, 0.0);
        let s = OptimizeSpec::new(model).with_tolerance(TOL);
        for _ in 0..20 {
            let mut p = honest_channel(&mut rng);
            p = p.at_distance(p.distance_km() / 3.0).unwrap();
            let golden = optimize_mu(&p, &s).unwrap();
            let steps = ((s.mu_max - s.mu_min) / TOL).round() as usize;
            let best = (0..=steps)
                .map(|k| s.mu_min + k as f64 * TOL)
                .map(|mu| model.rate(&p, mu).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                golden.rate >= best - 1e-7 * best.abs(),
                "{formula}: {} < {best}",
                golden.rate
            );
        }
    }
}

#[test]
fn cutoff_shrinks_with_attenuation_and_grows_with_efficiency() {
    let s = spec(RateFormula::Infinite);
    let cut = |alpha, eta_ab| {
        let p = ChannelParams::new(alpha, eta_ab, 1.7e-6, 0.033, 0.0).unwrap();
        cutoff_distance(&p, &s, 300.0).unwrap()
    };
    let by_alpha: Vec<f64> = [0.18, 0.21, 0.25, 0.3]
        .iter()
        .map(|&a| cut(a, 0.045))
        .collect();
    assert!(by_alpha.windows(2).all(|w| w[1] < w[0]), "{by_alpha:?}");
    let by_eta: Vec<f64> = [0.02, 0.045, 0.1].iter().map(|&e| cut(0.21, e)).collect();
    assert!(by_eta.windows(2).all(|w| w[1] > w[0]), "{by_eta:?}");
}

#[test]
fn decoy_rates_dominate_non_decoy_rate() {
    let p = ChannelParams::gys(0.0).unwrap();
    let non = spec(RateFormula::NonDecoy);
    let end = cutoff_distance(&p, &non, 300.0).unwrap();
    for formula in [RateFormula::FiniteAInfinite, RateFormula::FiniteAGenuine] {
        let decoy = spec(formula);
        assert_eq!(
            crossing_distance(&p, &decoy, &non, end).unwrap(),
            None,
            "{formula}"
        );
        let r = |s: &OptimizeSpec| optimize_mu(&p, s).unwrap().rate;
        assert!(r(&decoy) > r(&non), "{formula}");
    }
}

#[test]
fn finite_decoy_cutoffs_do_not_exceed_asymptotic_cutoff() {
    let p = ChannelParams::gys(0.0).unwrap();
    let inf = cutoff_distance(&p, &spec(RateFormula::Infinite), 300.0).unwrap();
    for formula in [
        RateFormula::FiniteAInfinite,
        RateFormula::FiniteAGenuine,
        RateFormula::FiniteB,
    ] {
        let l = cutoff_distance(&p, &spec(formula), 300.0).unwrap();
        assert!(l <= inf + 0.1, "{formula}: {l} > {inf}");
    }
}

#[test]
fn sampled_gains_lie_within_five_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for seed in 0..10 {
        let p = honest_channel(&mut rng);
        let s = intensity_set(&mut rng);
        let n = 200_000u64;
        let session = sample_session(&p, &s, &SampleSpec::new(n, seed).unwrap());
        for (counts, intensity) in [(session.mu, s.mu()), (session.nu1, s.nu1())] {
            let (q, _) = total_gain_and_qber(&p, intensity);
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!(
                (counts.gain() - q).abs() <= 5.0 * se,
                "{} vs {q}",
                counts.gain()
            );
        }
    }
}

#[test]
fn sampled_qber_approaches_analytic_qber() {
    let p = ChannelParams::gys(0.0).unwrap();
    let (q, e) = total_gain_and_qber(&p, 0.5);
    let n = 4_000_000u64;
    let c = sample_intensity(&p, 0.5, n, 3, 0);
    let se = (e * (1.0 - e) / (q * n as f64)).sqrt();
    assert!((c.qber() - e).abs() <= 5.0 * se, "{} vs {e}", c.qber());
}

#[test]
fn truth_reference_matches_library_yields() {
    let p = ChannelParams::gys(40.0).unwrap();
    let t = truth(&p, 0.45);
    assert!(rel_diff(t.y1, yield_i(&p, 1)) < 1e-12);
    assert!(rel_diff(t.y2, yield_i(&p, 2)) < 1e-12);
}
