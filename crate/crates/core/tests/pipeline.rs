//! Cross-module checks: the time-delay scenario, the generic post-selection
//! model, the samplers, the information functions and the feedback loop
//! must all describe the same physics.

use awva_core::{
    error_limit, estimate_tau, fisher_numeric, run_adaptive, sample_photons_fast, AdaptiveConfig,
    RandomStream, ShiftSource, StopReason, TimeDelayScenario,
};
use proptest::prelude::*;

const OMEGA0: f64 = 2.4;
const DELTA: f64 = 0.055;
const TAU: f64 = 0.008;

fn scenario(epsilon: f64) -> TimeDelayScenario {
    TimeDelayScenario::new(OMEGA0, DELTA, TAU, epsilon).unwrap()
}

#[test]
fn postselected_mean_matches_spectrum_shift() {
    for eps in [0.005, 0.0192, 0.03, 0.1, 0.5] {
        let s = scenario(eps);
        let mean = s.to_measurement_model().post_distribution().unwrap().mean().unwrap();
        let shift = s.spectrum_shift().unwrap();
        assert!(
            ((mean - OMEGA0) - shift).abs() <= 1e-8 * shift.abs() + 1e-13,
            "eps {eps}: {} vs {shift}",
            mean - OMEGA0
        );
    }
}

#[test]
fn sampled_spectrum_reproduces_shift_and_rate() {
    let s = scenario(0.03);
    let model = s.to_measurement_model();
    let p_d = model.postselect_probability().unwrap();
    let n = 2_000_000_000u64;
    let batch = sample_photons_fast(&model, n, &mut RandomStream::new(3).child(0));

    let expected = n as f64 * p_d;
    let z_count = (batch.n_accepted as f64 - expected) / (expected * (1.0 - p_d)).sqrt();
    assert!(z_count.abs() < 5.0, "count z = {z_count}");

    let xs = &batch.accepted_x;
    let mean = batch.mean().unwrap();
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    let z_shift = (mean - OMEGA0 - s.spectrum_shift().unwrap()) / (var / xs.len() as f64).sqrt();
    assert!(z_shift.abs() < 5.0, "shift z = {z_shift}");
}

#[test]
fn information_peaks_at_optimal_angle() {
    let s = scenario(0.03);
    let best = s.with_epsilon(s.epsilon_opt()).unwrap();
    let peak = best.fisher_tau().unwrap().value;
    assert!((peak / s.max_information_tau() - 1.0).abs() < 1e-3, "{peak}");
    for factor in [0.5, 0.8, 1.25, 2.0] {
        let other = s.with_epsilon(factor * s.epsilon_opt()).unwrap();
        assert!(other.fisher_tau().unwrap().value < peak);
    }
    // the delay information is a quarter of the coupling information
    let coupling = fisher_numeric(&best.to_measurement_model()).unwrap().value;
    assert!((best.fisher_tau().unwrap().value - coupling / 4.0).abs() <= 1e-12 * coupling);
}

#[test]
fn error_limits_scale_with_information_ratio() {
    let s = scenario(0.03);
    let awva = error_limit(s.max_information_tau(), 1_000_000).unwrap();
    let swva = error_limit(s.swva_information_tau(), 1_000_000).unwrap();
    let ratio = (s.max_information_tau() / s.swva_information_tau()).sqrt();
    assert!((swva / awva - ratio).abs() < 1e-12 * ratio);
    assert!((ratio - 43.65).abs() < 0.01);
}

#[test]
fn noise_free_loop_recovers_the_delay() {
    let cfg = AdaptiveConfig {
        shift_source: ShiftSource::NoiseFree,
        ..AdaptiveConfig::default()
    };
    for tau in [0.004, 0.008, 0.012] {
        let s = TimeDelayScenario::new(OMEGA0, DELTA, tau, 0.03).unwrap();
        let trace = run_adaptive(&s, &cfg, &mut RandomStream::new(1)).unwrap();
        assert_eq!(trace.stop_reason, StopReason::SignFlip);
        assert!((trace.epsilon_final - s.zero_shift_epsilon()).abs() <= cfg.step);
        let tau_hat = trace.tau_hat().unwrap();
        assert!((tau_hat - tau).abs() <= cfg.step / OMEGA0, "{tau_hat} vs {tau}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn postselection_probability_has_closed_form(
        eps in 0.001f64..3.0,
        tau in -0.03f64..0.03,
        delta in 0.01f64..0.2,
    ) {
        let s = TimeDelayScenario::new(OMEGA0, delta, tau, eps).unwrap();
        let p = s.to_measurement_model().postselect_probability().unwrap();
        // ∫ sin²((ωτ − ε)/2) P₀ dω
        let expected = 0.5 * (1.0 - (-0.5 * (delta * tau).powi(2)).exp() * (OMEGA0 * tau - eps).cos());
        prop_assert!((p - expected).abs() <= 1e-8 * expected + 1e-15, "{} vs {}", p, expected);
    }

    #[test]
    fn estimator_inverts_the_shift(eps in 0.001f64..0.1, tau in 0.001f64..0.02) {
        let s = TimeDelayScenario::new(OMEGA0, DELTA, tau, eps).unwrap();
        let linear = s.spectrum_shift_linear().unwrap().value;
        let tau_hat = estimate_tau(eps, linear, OMEGA0).unwrap();
        prop_assert!((tau_hat - tau).abs() <= 1e-12 * tau);
    }
}
