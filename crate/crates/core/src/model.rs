//! Two-level system states, the Gaussian pointer and weak-value algebra.
//!
//! A two-level state is `cos(θ/2)|−1⟩ + sin(θ/2)e^{iφ}|+1⟩`. The measured
//! observable `Â` has eigenvalue `+1` on `|−1⟩` and `−1` on `|+1⟩`, so the
//! coupling `exp(−i g Â x)` multiplies `|−1⟩` by `e^{−igx}` and `|+1⟩` by
//! `e^{+igx}`. Only the phase difference `ε₀ = φ_post − φ_pre` enters the
//! weak value and the overlap.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Overlaps below this are treated as orthogonal.
pub const ORTHOGONAL_OVERLAP: f64 = 1e-30;

const THETA_SLACK: f64 = 1e-12;

/// Pure state of the two-level system on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelState {
    theta: f64,
    phase: f64,
}

impl TwoLevelState {
    /// `theta` must lie in `[0, π]` (up to a 1e-12 band, which is clamped);
    /// `phase` is reduced mod 2π.
    pub fn new(theta: f64, phase: f64) -> Result<Self> {
        if !theta.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite Bloch angles (theta={theta}, phase={phase})"
            )));
        }
        if !(-THETA_SLACK..=PI + THETA_SLACK).contains(&theta) {
            return Err(Error::InvalidInput(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        let phase = phase.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs
        let phase = if phase >= TAU { 0.0 } else { phase };
        Ok(Self {
            theta: theta.clamp(0.0, PI),
            phase,
        })
    }

    /// A state on the equator, `(|−1⟩ + e^{iφ}|+1⟩)/√2`.
    pub fn equatorial(phase: f64) -> Result<Self> {
        Self::new(FRAC_PI_2, phase)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Amplitudes on `(|−1⟩, |+1⟩)`.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let half = 0.5 * self.theta;
        (
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), self.phase),
        )
    }
}

/// Continuous pointer with Gaussian distribution `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPointer {
    mean: f64,
    variance: f64,
}

impl GaussianPointer {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "pointer needs finite mean and positive variance (mean={mean}, variance={variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn from_std_dev(mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(mean, std_dev * std_dev)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `⟨x²⟩₀ = x₀² + Δ²`.
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.variance
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        (-0.5 * d * d / self.variance).exp() / (TAU * self.variance).sqrt()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * d * d / self.variance - 0.5 * (TAU * self.variance).ln()
    }

    /// `[mean − k σ, mean + k σ]`.
    pub fn support(&self, k: f64) -> (f64, f64) {
        let s = k * self.std_dev();
        (self.mean - s, self.mean + s)
    }
}

/// Complex weak value `A_w = a + ib`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValue {
    pub re: f64,
    pub im: f64,
}

impl WeakValue {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidInput(format!(
                "weak value must be finite, got {re} + {im}i"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn imaginary(im: f64) -> Result<Self> {
        Self::new(0.0, im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// System–pointer coupling strength `g` (inverse pointer units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub g: f64,
}

impl CouplingConfig {
    pub const WEAK_COUPLING_LIMIT: f64 = 0.1;

    pub fn new(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::InvalidInput(format!("coupling must be finite, got {g}")));
        }
        Ok(Self { g })
    }

    /// True when `|g x₀| >= 0.1`, outside the weak-coupling region.
    pub fn violates_weak_coupling(&self, pointer: &GaussianPointer) -> bool {
        (self.g * pointer.mean()).abs() >= Self::WEAK_COUPLING_LIMIT
    }
}

// ν written as cos²((θi+θf)/2) + sinθi sinθf cos²(ε₀/2), which avoids the
// cancellation in 1 + cos ε₀ near ε₀ = π.
fn overlap_parts(pre: &TwoLevelState, post: &TwoLevelState) -> (f64, f64) {
    let sum_half = 0.5 * (pre.theta + post.theta);
    let eps0 = post.phase - pre.phase;
    let c = sum_half.cos();
    let nu = c * c + pre.theta.sin() * post.theta.sin() * (0.5 * eps0).cos().powi(2);
    (nu, eps0)
}

/// Post-selection overlap `ν = |⟨φ_f|φ_i⟩|²`.
pub fn overlap_probability(pre: &TwoLevelState, post: &TwoLevelState) -> f64 {
    overlap_parts(pre, post).0.clamp(0.0, 1.0)
}

/// Weak value of `Â` between `pre` and `post`:
///
/// `A_w = (cosθi + cosθf − i sinθi sinθf sinε₀) / (1 + cosθi cosθf + sinθi sinθf cosε₀)`.
pub fn weak_value(pre: &TwoLevelState, post: &TwoLevelState) -> Result<WeakValue> {
    let (nu, eps0) = overlap_parts(pre, post);
    if nu < ORTHOGONAL_OVERLAP {
        return Err(Error::OrthogonalStates { overlap: nu });
    }
    // cosθi + cosθf = 2 cos((θi+θf)/2) cos((θi−θf)/2); the denominator is 2ν.
    let re = (0.5 * (pre.theta + post.theta)).cos() * (0.5 * (pre.theta - post.theta)).cos() / nu;
    let im = -0.5 * pre.theta.sin() * post.theta.sin() * eps0.sin() / nu;
    WeakValue::new(re, im)
}

/// Polar angles `(θi, θf)` that maximise the quantum Fisher information and
/// make the weak value purely imaginary.
pub fn optimality_angles() -> (f64, f64) {
    (FRAC_PI_2, FRAC_PI_2)
}

/// Pre/post-selected states realising a given weak value with `θi = π/2`.
///
/// With the pre-selection on the equator the overlap is fixed by the weak
/// value, `ν = 1/(1 + |A_w|²)`.
pub fn states_for_weak_value(aw: WeakValue) -> Result<(TwoLevelState, TwoLevelState)> {
    let d = 2.0 / (1.0 + aw.norm_sqr());
    let cos_theta_f = (aw.re * d).clamp(-1.0, 1.0);
    let theta_f = cos_theta_f.acos();
    let eps0 = (-aw.im * d).atan2(d - 1.0);
    Ok((
        TwoLevelState::equatorial(0.0)?,
        TwoLevelState::new(theta_f, eps0)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn eq(phase: f64) -> TwoLevelState {
        TwoLevelState::equatorial(phase).unwrap()
    }

    #[test]
    fn weak_value_of_eigenstate_is_its_eigenvalue() {
        let down = TwoLevelState::new(0.0, 0.0).unwrap();
        let aw = weak_value(&down, &down).unwrap();
        assert_relative_eq!(aw.re, 1.0, epsilon = 1e-15);
        assert_eq!(aw.im, 0.0);

        let up = TwoLevelState::new(PI, 0.0).unwrap();
        let aw = weak_value(&up, &up).unwrap();
        assert_relative_eq!(aw.re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn near_orthogonal_equatorial_states() {
        let aw = weak_value(&eq(0.0), &eq(PI - 0.03)).unwrap();
        assert!(aw.re.abs() < 1e-12);
        // -cot(0.015)
        assert_relative_eq!(aw.im, -66.661666591665, max_relative = 1e-12);

        let aw = weak_value(&eq(0.0), &eq(FRAC_PI_2)).unwrap();
        assert_relative_eq!(aw.im, -1.0, max_relative = 1e-14);
        assert!(aw.re.abs() < 1e-15);
    }

    #[test]
    fn overlap_examples() {
        assert_relative_eq!(overlap_probability(&eq(0.3), &eq(0.3)), 1.0, epsilon = 1e-15);
        let generic = TwoLevelState::new(1.1, 4.0).unwrap();
        assert_relative_eq!(overlap_probability(&generic, &generic), 1.0, epsilon = 1e-15);
        // ½(1 − cos 0.03)
        assert_relative_eq!(
            overlap_probability(&eq(0.0), &eq(PI - 0.03)),
            2.2498312550624e-4,
            max_relative = 1e-11
        );
        assert!(overlap_probability(&eq(0.0), &eq(PI)) < 1e-30);
    }

    #[test]
    fn orthogonal_states_are_rejected() {
        let err = weak_value(&eq(0.0), &eq(PI)).unwrap_err();
        assert!(matches!(err, Error::OrthogonalStates { .. }));
        let up = TwoLevelState::new(PI, 0.0).unwrap();
        let down = TwoLevelState::new(0.0, 0.0).unwrap();
        assert!(matches!(
            weak_value(&up, &down),
            Err(Error::OrthogonalStates { .. })
        ));
    }

    #[test]
    fn optimality_angles_are_equatorial() {
        let (ti, tf) = optimality_angles();
        assert_eq!((ti, tf), (FRAC_PI_2, FRAC_PI_2));
        for eps0 in [0.1, 1.0, 2.5, PI - 1e-3, 4.0] {
            let aw = weak_value(&TwoLevelState::new(ti, 0.0).unwrap(), &TwoLevelState::new(tf, eps0).unwrap())
                .unwrap();
            assert!(aw.re.abs() <= 1e-12 * aw.im.abs().max(1.0), "re = {}", aw.re);
        }
    }

    #[test]
    fn state_validation() {
        assert!(TwoLevelState::new(-0.1, 0.0).is_err());
        assert!(TwoLevelState::new(PI + 1e-6, 0.0).is_err());
        assert!(TwoLevelState::new(f64::NAN, 0.0).is_err());
        let s = TwoLevelState::new(PI + 1e-13, -0.5).unwrap();
        assert_eq!(s.theta(), PI);
        assert_relative_eq!(s.phase(), TAU - 0.5, epsilon = 1e-15);
        assert!(GaussianPointer::new(0.0, 0.0).is_err());
        assert!(GaussianPointer::new(0.0, -1.0).is_err());
    }

    #[test]
    fn second_moment_is_exact() {
        let p = GaussianPointer::new(2.4, 0.055 * 0.055).unwrap();
        assert_eq!(p.second_moment(), 2.4 * 2.4 + 0.055 * 0.055);
    }

    #[test]
    fn weak_coupling_flag() {
        let p = GaussianPointer::new(2.4, 0.003025).unwrap();
        assert!(!CouplingConfig::new(0.004).unwrap().violates_weak_coupling(&p));
        assert!(CouplingConfig::new(0.05).unwrap().violates_weak_coupling(&p));
    }

    #[test]
    fn amplitudes_are_normalised() {
        let s = TwoLevelState::new(1.234, 5.0).unwrap();
        let (a, b) = s.amplitudes();
        assert_relative_eq!(a.norm_sqr() + b.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn overlap_times_weak_value_norm_is_one_on_equator(eps0 in 1e-3f64..(TAU - 1e-3)) {
            let pre = eq(0.0);
            let post = eq(eps0);
            prop_assume!(overlap_probability(&pre, &post) > 1e-20);
            let nu = overlap_probability(&pre, &post);
            let aw = weak_value(&pre, &post).unwrap();
            let lhs = nu * (1.0 + aw.norm_sqr());
            prop_assert!((lhs - 1.0).abs() <= 1e-12, "nu(1+|A|^2) = {lhs}");
        }

        #[test]
        fn weak_value_depends_on_phase_difference_only(
            ti in 0.0f64..PI, tf in 0.0f64..PI, pi in 0.0f64..TAU, pf in 0.0f64..TAU, shift in -10.0f64..10.0
        ) {
            let a = (TwoLevelState::new(ti, pi).unwrap(), TwoLevelState::new(tf, pf).unwrap());
            let b = (TwoLevelState::new(ti, pi + shift).unwrap(), TwoLevelState::new(tf, pf + shift).unwrap());
            prop_assume!(overlap_probability(&a.0, &a.1) > 1e-6);
            let wa = weak_value(&a.0, &a.1).unwrap();
            let wb = weak_value(&b.0, &b.1).unwrap();
            let scale = wa.norm_sqr().sqrt().max(1.0);
            prop_assert!((wa.re - wb.re).abs() <= 1e-9 * scale);
            prop_assert!((wa.im - wb.im).abs() <= 1e-9 * scale);
        }

        #[test]
        fn equatorial_weak_value_is_minus_i_cot(eps in 1e-4f64..3.0) {
            let aw = weak_value(&eq(0.0), &eq(PI - eps)).unwrap();
            let cot = 1.0 / (0.5 * eps).tan();
            prop_assert!(aw.re.abs() <= 1e-12 * cot.max(1.0));
            prop_assert!(((aw.im + cot) / cot).abs() <= 1e-12, "im={} cot={}", aw.im, cot);
        }

        #[test]
        fn weak_value_matches_direct_amplitude_ratio(
            ti in 0.0f64..PI, tf in 0.0f64..PI, eps0 in 0.0f64..TAU
        ) {
            // The closed form is the ratio (c − s e^{iε₀}) / (c + s e^{iε₀}).
            let c = (0.5 * ti).cos() * (0.5 * tf).cos();
            let s = (0.5 * ti).sin() * (0.5 * tf).sin();
            let e = Complex64::from_polar(1.0, eps0);
            let den = c + s * e;
            prop_assume!(den.norm_sqr() > 1e-6);
            let direct = (c - s * e) / den;
            let aw = weak_value(&TwoLevelState::new(ti, 0.0).unwrap(), &TwoLevelState::new(tf, eps0).unwrap()).unwrap();
            let scale = direct.norm().max(1.0);
            prop_assert!((aw.re - direct.re).abs() <= 1e-9 * scale);
            prop_assert!((aw.im - direct.im).abs() <= 1e-9 * scale);
            prop_assert!((overlap_probability(&TwoLevelState::new(ti, 0.0).unwrap(), &TwoLevelState::new(tf, eps0).unwrap()) - den.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn states_for_weak_value_round_trip(a in -0.5f64..0.5, b in -500.0f64..500.0) {
            let aw = WeakValue::new(a, b).unwrap();
            let (pre, post) = states_for_weak_value(aw).unwrap();
            let back = weak_value(&pre, &post).unwrap();
            let scale = aw.norm_sqr().sqrt().max(1.0);
            prop_assert!((back.re - a).abs() <= 1e-10 * scale);
            prop_assert!((back.im - b).abs() <= 1e-10 * scale);
            let nu = overlap_probability(&pre, &post);
            prop_assert!((nu * (1.0 + aw.norm_sqr()) - 1.0).abs() < 1e-10);
        }
    }
}
