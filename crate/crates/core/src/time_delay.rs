//! Optical time-delay measurement with a frequency pointer.
//!
//! A photon with spectrum `N(ω₀, Δ²)` is prepared in `(|H⟩+|V⟩)/√2`, picks
//! up a polarisation-dependent phase `e^{∓iωτ/2}` and is projected on
//! `(|H⟩−e^{iε}|V⟩)/√2`. In the two-level language this is `θi = θf = π/2`,
//! a relative phase `π − ε` and coupling `g = τ/2`, which gives the weak
//! value `−i cot(ε/2)` and the accepted spectrum
//! `F(ω) = sin²((ωτ − ε)/2) P₀(ω)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidityFlag};
use crate::fisher::{fisher_numeric, FisherResult};
use crate::measure::MeasurementModel;
use crate::model::{CouplingConfig, GaussianPointer, TwoLevelState, ORTHOGONAL_OVERLAP};

/// `|ω₀τ|` at and beyond which the delay is no longer a weak coupling.
pub const WEAK_DELAY_LIMIT: f64 = 0.1;

/// Half-width of the linear-shift window in units of `Δτ`.
pub const LINEAR_WINDOW: f64 = 0.3;

const SINGULAR_SHIFT_DENOMINATOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDelayScenario {
    omega0: f64,
    delta: f64,
    tau: f64,
    epsilon: f64,
}

/// A closed-form value together with the approximations it violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedValue {
    pub value: f64,
    pub validity_flags: Vec<ValidityFlag>,
}

impl TimeDelayScenario {
    /// `omega0` and `delta` in rad/fs, `tau` in fs, `epsilon` in `(0, π)`.
    pub fn new(omega0: f64, delta: f64, tau: f64, epsilon: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidInput(format!("omega0 must be positive, got {omega0}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        if !tau.is_finite() {
            return Err(Error::InvalidInput(format!("tau must be finite, got {tau}")));
        }
        check_epsilon(epsilon)?;
        Ok(Self {
            omega0,
            delta,
            tau,
            epsilon,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon, ..*self })
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.omega0, self.delta, tau, self.epsilon)
    }

    pub fn validity_flags(&self) -> Vec<ValidityFlag> {
        if (self.omega0 * self.tau).abs() >= WEAK_DELAY_LIMIT {
            vec![ValidityFlag::WeakCoupling]
        } else {
            Vec::new()
        }
    }

    /// The input spectrum `N(ω₀, Δ²)`.
    pub fn pointer(&self) -> GaussianPointer {
        GaussianPointer::from_std_dev(self.omega0, self.delta).expect("validated in constructor")
    }

    pub fn to_measurement_model(&self) -> MeasurementModel {
        let pre = TwoLevelState::equatorial(0.0).expect("finite phase");
        let post = TwoLevelState::equatorial(PI - self.epsilon).expect("finite phase");
        let coupling = CouplingConfig::new(0.5 * self.tau).expect("finite delay");
        MeasurementModel::new(self.pointer(), pre, post, coupling)
            .expect("epsilon is bounded away from the orthogonal configuration")
    }

    /// Unnormalised accepted spectrum `F(ω) = sin²((ωτ − ε)/2) P₀(ω)`.
    pub fn spectrum_density(&self, omega: f64) -> f64 {
        (0.5 * (omega * self.tau - self.epsilon)).sin().powi(2) * self.pointer().pdf(omega)
    }

    /// Mean shift of the accepted spectrum,
    /// `Δω = Δ²τ e^{−Δ²τ²/2} sin(ω₀τ−ε) / (1 − e^{−Δ²τ²/2} cos(ω₀τ−ε))`.
    pub fn spectrum_shift(&self) -> Result<f64> {
        let a = 0.5 * (self.delta * self.tau).powi(2);
        let detuning = self.omega0 * self.tau - self.epsilon;
        let decay = (-a).exp();
        // 1 − e^{−a} cos δ = (1 − e^{−a}) + 2 e^{−a} sin²(δ/2)
        let denominator = -(-a).exp_m1() + 2.0 * decay * (0.5 * detuning).sin().powi(2);
        if denominator <= SINGULAR_SHIFT_DENOMINATOR {
            return Err(Error::SingularDenominator { value: denominator });
        }
        Ok(self.delta.powi(2) * self.tau * decay * detuning.sin() / denominator)
    }

    /// Linearised shift `2(ω₀τ − ε)/τ`, flagged outside
    /// `|ω₀τ − ε| ≤ 0.3 Δτ`.
    pub fn spectrum_shift_linear(&self) -> Result<FlaggedValue> {
        if self.tau == 0.0 {
            return Err(Error::ZeroDelay);
        }
        let detuning = self.omega0 * self.tau - self.epsilon;
        let mut validity_flags = Vec::new();
        if detuning.abs() > LINEAR_WINDOW * self.delta * self.tau.abs() {
            validity_flags.push(ValidityFlag::LinearShiftWindow);
        }
        Ok(FlaggedValue {
            value: 2.0 * detuning / self.tau,
            validity_flags,
        })
    }

    /// Post-selection angle of maximal information, `⟨ω²⟩₀ τ / ω₀`.
    pub fn epsilon_opt(&self) -> f64 {
        self.pointer().second_moment() * self.tau / self.omega0
    }

    /// Angle at which the spectrum shift vanishes, `ω₀τ`.
    pub fn zero_shift_epsilon(&self) -> f64 {
        self.omega0 * self.tau
    }

    /// Fisher information about `τ` per input photon at the current angle.
    pub fn fisher_tau(&self) -> Result<FisherResult> {
        Ok(fisher_numeric(&self.to_measurement_model())?.rescaled(0.5))
    }

    /// Best attainable information about `τ` per input photon, `⟨ω²⟩₀`.
    pub fn max_information_tau(&self) -> f64 {
        self.pointer().second_moment()
    }

    /// Information about `τ` in the balanced-pointer regime, `Δ²`.
    pub fn swva_information_tau(&self) -> f64 {
        self.delta * self.delta
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::InvalidInput(format!(
            "post-selection angle must lie in (0, pi), got {epsilon}"
        )));
    }
    if (0.5 * epsilon).sin().powi(2) < ORTHOGONAL_OVERLAP {
        return Err(Error::OrthogonalStates {
            overlap: (0.5 * epsilon).sin().powi(2),
        });
    }
    Ok(())
}

/// Delay from a measured shift, `τ̂ = 2ε / (2ω₀ − Δω)`.
pub fn estimate_tau(epsilon: f64, delta_omega: f64, omega0: f64) -> Result<f64> {
    let denominator = 2.0 * omega0 - delta_omega;
    if denominator.is_nan() || denominator <= 0.0 {
        return Err(Error::SingularDenominator { value: denominator });
    }
    Ok(2.0 * epsilon / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::optimal_imag_weak_value;
    use crate::model::overlap_probability;
    use crate::quadrature::{integrate_panels, Tolerance};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scenario(epsilon: f64) -> TimeDelayScenario {
        TimeDelayScenario::new(2.4, 0.055, 0.008, epsilon).unwrap()
    }

    // Mean shift by direct quadrature of ω·F(ω) over ω₀ ± 12Δ.
    fn quadrature_shift(s: &TimeDelayScenario) -> f64 {
        let (lo, hi) = (s.omega0 - 12.0 * s.delta, s.omega0 + 12.0 * s.delta);
        let tol = Tolerance::relative(1e-12);
        let mass = integrate_panels(|w| s.spectrum_density(w), lo, hi, 16, tol).unwrap().value;
        let first = integrate_panels(|w| (w - s.omega0) * s.spectrum_density(w), lo, hi, 16, tol)
            .unwrap()
            .value;
        first / mass
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TimeDelayScenario::new(0.0, 0.055, 0.008, 0.03).is_err());
        assert!(TimeDelayScenario::new(2.4, 0.0, 0.008, 0.03).is_err());
        assert!(TimeDelayScenario::new(2.4, 0.055, f64::NAN, 0.03).is_err());
        assert!(TimeDelayScenario::new(2.4, 0.055, 0.008, 0.0).is_err());
        assert!(TimeDelayScenario::new(2.4, 0.055, 0.008, PI).is_err());
        assert!(TimeDelayScenario::new(2.4, 0.055, 0.008, -0.1).is_err());
        assert!(scenario(0.03).with_epsilon(1e-300).is_err());
    }

    #[test]
    fn large_delay_is_flagged() {
        assert!(scenario(0.03).validity_flags().is_empty());
        let s = scenario(0.03).with_tau(0.05).unwrap();
        assert_eq!(s.validity_flags(), vec![ValidityFlag::WeakCoupling]);
    }

    #[test]
    fn mapped_weak_value_is_minus_i_cot() {
        let m = scenario(0.03).to_measurement_model();
        assert_relative_eq!(m.weak_value().im, -66.6616665916650, max_relative = 1e-12);
        assert!(m.weak_value().re.abs() < 1e-12);
        let m = scenario(PI / 2.0).to_measurement_model();
        assert_relative_eq!(m.weak_value().im, -1.0, max_relative = 1e-12);
        assert_eq!(m.g(), 0.004);
    }

    #[test]
    fn mapped_overlap_is_sin_squared_half_angle() {
        for eps in [1e-4, 0.03, 0.5, 2.0, 3.1] {
            let m = scenario(eps).to_measurement_model();
            let expected = (0.5 * eps).sin().powi(2);
            assert_relative_eq!(m.overlap(), expected, max_relative = 1e-12);
            assert_relative_eq!(overlap_probability(m.pre(), m.post()), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn postselection_probability_matches_closed_form() {
        // P_d = ½(1 − e^{−Δ²τ²/2} cos(ω₀τ − ε))
        for eps in [0.03, 0.0192, 0.05] {
            let s = scenario(eps);
            let a = 0.5 * (s.delta * s.tau).powi(2);
            let d = s.omega0 * s.tau - eps;
            let exact = 0.5 * (-(-a).exp_m1() + 2.0 * (-a).exp() * (0.5 * d).sin().powi(2));
            let p_d = s.to_measurement_model().postselect_probability().unwrap();
            assert_relative_eq!(p_d, exact, max_relative = 1e-9);
        }
        let p = scenario(0.03).to_measurement_model().postselect_probability().unwrap();
        assert_relative_eq!(p, 2.921e-5, max_relative = 1e-3);
    }

    #[test]
    fn pipeline_density_equals_normalised_spectrum() {
        let s = scenario(0.03);
        let dist = s.to_measurement_model().post_distribution().unwrap();
        let (lo, hi) = (s.omega0 - 10.0 * s.delta, s.omega0 + 10.0 * s.delta);
        let mass = integrate_panels(|w| s.spectrum_density(w), lo, hi, 16, Tolerance::relative(1e-13))
            .unwrap()
            .value;
        for k in 0..=40 {
            let w = s.omega0 + s.delta * (-5.0 + 0.25 * k as f64);
            assert_relative_eq!(dist.pdf(w), s.spectrum_density(w) / mass, max_relative = 1e-8);
        }
    }

    #[test]
    fn shift_examples() {
        assert_eq!(scenario(2.4 * 0.008).spectrum_shift().unwrap(), 0.0);
        assert_relative_eq!(scenario(0.03).spectrum_shift().unwrap(), -4.474e-3, max_relative = 1e-3);
        let near = scenario(2.4 * 0.008 - 2e-5).spectrum_shift().unwrap();
        assert_relative_eq!(near, 4.99e-3, max_relative = 1e-3);
    }

    #[test]
    fn shift_matches_quadrature_mean() {
        for (eps, tau) in [(0.03, 0.008), (0.01, 0.002), (0.09, 0.02), (0.019, 0.008)] {
            let s = TimeDelayScenario::new(2.4, 0.055, tau, eps).unwrap();
            let closed = s.spectrum_shift().unwrap();
            assert_relative_eq!(closed, quadrature_shift(&s), max_relative = 1e-8);
        }
    }

    #[test]
    fn shift_matches_model_mean() {
        let s = scenario(0.03);
        let mean = s.to_measurement_model().post_distribution().unwrap().mean().unwrap();
        assert_relative_eq!(mean - s.omega0, s.spectrum_shift().unwrap(), max_relative = 1e-8);
    }

    #[test]
    fn singular_shift_denominator() {
        // Δτ so small that e^{−Δ²τ²/2} rounds to 1 right at the zero point
        let s = TimeDelayScenario::new(2.4, 1e-20, 0.008, 2.4 * 0.008).unwrap();
        assert!(matches!(s.spectrum_shift(), Err(Error::SingularDenominator { .. })));
        let no_delay = TimeDelayScenario::new(2.4, 0.055, 0.0, 0.03).unwrap();
        assert_eq!(no_delay.spectrum_shift().unwrap(), 0.0);
    }

    #[test]
    fn linear_shift() {
        let exact = scenario(2.4 * 0.008).spectrum_shift_linear().unwrap();
        assert_eq!(exact.value, 0.0);
        assert!(exact.validity_flags.is_empty());
        let s = scenario(2.4 * 0.008 - 2e-5);
        assert_relative_eq!(s.spectrum_shift_linear().unwrap().value, 5.0e-3, max_relative = 1e-9);
        let far = scenario(0.03).spectrum_shift_linear().unwrap();
        assert_eq!(far.validity_flags, vec![ValidityFlag::LinearShiftWindow]);
        let zero = TimeDelayScenario::new(2.4, 0.055, 0.0, 0.03).unwrap();
        assert_eq!(zero.spectrum_shift_linear(), Err(Error::ZeroDelay));
    }

    #[test]
    fn linear_agrees_with_full_inside_narrow_window() {
        let s = scenario(0.03);
        let width = 0.1 * s.delta * s.tau;
        for k in -20..=20 {
            let d = width * k as f64 / 20.0;
            if d == 0.0 {
                continue;
            }
            let t = s.with_epsilon(s.omega0 * s.tau - d).unwrap();
            let full = t.spectrum_shift().unwrap();
            let lin = t.spectrum_shift_linear().unwrap().value;
            assert!((full - lin).abs() <= 0.01 * lin.abs(), "d={d}: {full} vs {lin}");
        }
    }

    #[test]
    fn optimal_angle() {
        let s = scenario(0.03);
        assert_relative_eq!(s.epsilon_opt(), 5.763025 * 0.008 / 2.4, max_relative = 1e-14);
        assert_relative_eq!(s.epsilon_opt(), 0.0192101, max_relative = 1e-6);
        let narrow = TimeDelayScenario::new(2.4, 1e-9, 0.008, 0.03).unwrap();
        assert_relative_eq!(narrow.epsilon_opt(), 2.4 * 0.008, max_relative = 1e-15);
        let aw = optimal_imag_weak_value(&s.pointer(), 0.5 * s.tau).unwrap();
        let implied = -1.0 / (0.5 * s.epsilon_opt()).tan();
        assert_relative_eq!(implied, aw.im, max_relative = 1e-4);
    }

    #[test]
    fn tau_estimator() {
        assert_eq!(estimate_tau(0.0192, 0.0, 2.4).unwrap(), 0.008);
        assert_relative_eq!(estimate_tau(0.0192101, 0.0, 2.4).unwrap(), 0.00800421, max_relative = 1e-6);
        assert_relative_eq!(estimate_tau(0.03, -4.474e-3, 2.4).unwrap(), 0.012488, max_relative = 1e-4);
        assert!(matches!(estimate_tau(0.03, 4.8, 2.4), Err(Error::SingularDenominator { .. })));
    }

    #[test]
    fn information_in_delay_units() {
        let s = scenario(0.03);
        let i_g = fisher_numeric(&s.to_measurement_model()).unwrap().value;
        assert_relative_eq!(s.fisher_tau().unwrap().value, i_g / 4.0, max_relative = 1e-15);
        assert_relative_eq!(s.max_information_tau(), 5.763025, max_relative = 1e-14);
        assert_relative_eq!(s.swva_information_tau(), 0.003025, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn shift_sign_points_to_zero_crossing(tau in 1e-3f64..0.02, eps in 1e-4f64..0.1) {
            let s = TimeDelayScenario::new(2.4, 0.055, tau, eps).unwrap();
            let d = s.omega0 * tau - eps;
            prop_assume!(d.abs() > 1e-12);
            let shift = s.spectrum_shift().unwrap();
            prop_assert_eq!(shift > 0.0, d > 0.0);
            prop_assert!(shift != 0.0);
        }

        #[test]
        fn estimator_inverts_linear_shift(tau in 1e-3f64..0.02, frac in -0.3f64..0.3) {
            let s = TimeDelayScenario::new(2.4, 0.055, tau, 2.4 * tau * (1.0 + frac * 0.01)).unwrap();
            let lin = s.spectrum_shift_linear().unwrap().value;
            let back = estimate_tau(s.epsilon, lin, s.omega0).unwrap();
            prop_assert!((back - tau).abs() <= 1e-12 * tau);
        }
    }
}
