//! Classical and quantum Fisher information with respect to the coupling `g`.
//!
//! All information values here are per input photon and in units of
//! (pointer units)², i.e. information about `g`. Conversion to another
//! parameter `p` with `g = g(p)` multiplies by `(dg/dp)²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidityFlag};
use crate::measure::MeasurementModel;
use crate::model::{GaussianPointer, WeakValue};
use crate::quadrature::{integrate_panels, Tolerance, DEFAULT_REL_TOL, POINTER_SUPPORT_SIGMAS};

/// `P_d` below this makes the post-selected density meaningless.
pub const DEGENERATE_POSTSELECTION: f64 = 1e-30;

const SINGULAR_DENOMINATOR: f64 = 1e-12;
const LARGE_WEAK_VALUE: f64 = 10.0;
const CROSS_CHECK_TOL: f64 = 1e-4;
const QFI_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FisherMethod {
    NumericQuadrature,
    ClosedImaginary,
    SwvaLimit,
    Qfi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub value: f64,
    pub method: FisherMethod,
    pub validity_flags: Vec<ValidityFlag>,
}

impl FisherResult {
    fn new(value: f64, method: FisherMethod) -> Self {
        Self {
            value: value.max(0.0),
            method,
            validity_flags: Vec::new(),
        }
    }

    fn flag(&mut self, flag: ValidityFlag) {
        if !self.validity_flags.contains(&flag) {
            self.validity_flags.push(flag);
        }
    }

    /// Information in the standard weak-value regime, `4Δ²`.
    pub fn swva_limit(pointer: &GaussianPointer) -> Self {
        Self::new(4.0 * pointer.variance(), FisherMethod::SwvaLimit)
    }

    /// Reparameterise: information about `p` where `dg/dp = jacobian`.
    pub fn rescaled(&self, jacobian: f64) -> Self {
        Self {
            value: self.value * jacobian * jacobian,
            ..self.clone()
        }
    }
}

/// Post-selected amplitude `ψ = cos(gx) + A_w·(−i) sin(gx)` (up to `√ν`) and
/// its `g`-derivative.
fn amplitude(x: f64, g: f64, aw: WeakValue) -> (Complex64, Complex64) {
    let (s, c) = (g * x).sin_cos();
    let psi = Complex64::new(c + aw.im * s, -aw.re * s);
    let dpsi = Complex64::new(x * (-s + aw.im * c), -aw.re * x * c);
    (psi, dpsi)
}

/// `I(g) = P_d ∫ (∂ log P(x,g)/∂g)² P(x,g) dx` by quadrature.
///
/// Uses the analytic `g`-derivatives of `ζ` and `P_d`. The result is
/// compared against the same integral built from a central finite
/// difference of `log P`; a disagreement beyond 1e-4 relative raises
/// [`ValidityFlag::DerivativeCrossCheck`].
pub fn fisher_numeric(m: &MeasurementModel) -> Result<FisherResult> {
    let p_d = m.postselect_probability()?;
    if p_d < DEGENERATE_POSTSELECTION {
        return Err(Error::DegenerateModel { p_d });
    }
    let ratio = m.postselect_probability_dg()? / p_d;
    let (g, aw, nu) = (m.g(), m.weak_value(), m.overlap());
    let pointer = *m.pointer();

    // P_d (∂ log P)² P = ν P₀ (ζ' − ζ r)² / ζ, written through the unit
    // phase of ψ so that zeros of ζ stay finite.
    let value = m.integrate_pointer(
        |x| {
            let (psi, dpsi) = amplitude(x, g, aw);
            let norm = psi.norm();
            let phase = if norm > 0.0 { psi / norm } else { Complex64::new(1.0, 0.0) };
            let t = 2.0 * (phase.conj() * dpsi).re - norm * ratio;
            nu * pointer.pdf(x) * t * t
        },
        DEFAULT_REL_TOL,
    )?;

    let mut result = FisherResult::new(value, FisherMethod::NumericQuadrature);
    if m.weak_coupling_violated() {
        result.flag(ValidityFlag::WeakCoupling);
    }
    match fisher_finite_difference(m) {
        Ok(fd) if (fd - value).abs() <= CROSS_CHECK_TOL * value.abs().max(1e-300) => {}
        _ => result.flag(ValidityFlag::DerivativeCrossCheck),
    }
    Ok(result)
}

// Same integral with `∂ζ/∂g` and `∂P_d/∂g` replaced by central differences.
// Differencing ζ rather than log ζ keeps the double zero of ζ harmless.
fn fisher_finite_difference(m: &MeasurementModel) -> Result<f64> {
    let g = m.g();
    let h = 1e-6 * g.abs().max(1.0);
    let plus = m.with_coupling(g + h)?;
    let minus = m.with_coupling(g - h)?;
    let p_d = m.postselect_probability()?;
    let ratio = (plus.postselect_probability()? - minus.postselect_probability()?) / (2.0 * h * p_d);
    let pointer = *m.pointer();
    m.integrate_pointer(
        |x| {
            let z = m.zeta(x);
            if z <= f64::MIN_POSITIVE {
                return 0.0;
            }
            let t = (plus.zeta(x) - minus.zeta(x)) / (2.0 * h) - z * ratio;
            m.overlap() * pointer.pdf(x) * t * t / z
        },
        1e-7,
    )
}

/// Large-imaginary-weak-value closed form
/// `I(g) = 4Δ² / (1 + ⟨x²⟩₀ b² g² + 2 x₀ b g)`.
pub fn fisher_closed_imag(pointer: &GaussianPointer, g: f64, b: f64) -> Result<FisherResult> {
    let bg = b * g;
    // (1 + x₀bg)² + Δ²b²g², the same denominator without cancellation
    let denominator = (1.0 + pointer.mean() * bg).powi(2) + pointer.variance() * bg * bg;
    if denominator <= SINGULAR_DENOMINATOR {
        return Err(Error::SingularDenominator { value: denominator });
    }
    let mut result = FisherResult::new(4.0 * pointer.variance() / denominator, FisherMethod::ClosedImaginary);
    if b.abs() < LARGE_WEAK_VALUE {
        result.flag(ValidityFlag::LargeWeakValue);
    }
    if (g * pointer.mean()).abs() >= crate::model::CouplingConfig::WEAK_COUPLING_LIMIT {
        result.flag(ValidityFlag::WeakCoupling);
    }
    Ok(result)
}

/// `A_w^opt = −i x₀ / (⟨x²⟩₀ g)`.
pub fn optimal_imag_weak_value(pointer: &GaussianPointer, g: f64) -> Result<WeakValue> {
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    WeakValue::imaginary(-pointer.mean() / (pointer.second_moment() * g))
}

/// Quantum Fisher information of the joint state after coupling,
/// `Q = 4[⟨x²⟩₀ − cos²θi x₀²]`.
pub fn qfi_closed(pointer: &GaussianPointer, theta_i: f64) -> FisherResult {
    let c = theta_i.cos();
    FisherResult::new(
        4.0 * (pointer.second_moment() - c * c * pointer.mean().powi(2)),
        FisherMethod::Qfi,
    )
}

/// Quantum Fisher information `4[⟨∂Ψ|∂Ψ⟩ − |⟨Ψ|∂Ψ⟩|²]` with both inner
/// products integrated numerically over the pointer.
pub fn qfi_numeric(pointer: &GaussianPointer, theta_i: f64, g: f64) -> Result<FisherResult> {
    let (lo, hi) = pointer.support(POINTER_SUPPORT_SIGMAS);
    let (cos_half, sin_half) = ((0.5 * theta_i).cos(), (0.5 * theta_i).sin());
    let i = Complex64::i();
    // components on |−1⟩ and |+1⟩ and their g-derivatives
    let components = |x: f64| {
        let f = pointer.pdf(x).sqrt();
        let down = cos_half * (-i * g * x).exp() * f;
        let up = sin_half * (i * g * x).exp() * f;
        (down, up, -i * x * down, i * x * up)
    };
    // the real part of ⟨Ψ|∂Ψ⟩ vanishes identically, so pure relative
    // tolerance would chase round-off
    let tol = Tolerance {
        rel: QFI_REL_TOL,
        abs: QFI_REL_TOL * pointer.second_moment(),
    };
    let integrate = |h: &dyn Fn(f64) -> f64| integrate_panels(h, lo, hi, 8, tol).map(|r| r.value);

    let norm_deriv = integrate(&|x| {
        let (_, _, dd, du) = components(x);
        dd.norm_sqr() + du.norm_sqr()
    })?;
    let overlap = |x: f64| {
        let (d, u, dd, du) = components(x);
        d.conj() * dd + u.conj() * du
    };
    let re = integrate(&|x| overlap(x).re)?;
    let im = integrate(&|x| overlap(x).im)?;
    Ok(FisherResult::new(
        4.0 * (norm_deriv - (re * re + im * im)),
        FisherMethod::Qfi,
    ))
}

/// Cramér–Rao error limit `1/√(N I)`.
pub fn error_limit(information: f64, n: u64) -> Result<f64> {
    if information.is_nan() || information <= 0.0 {
        return Err(Error::NonpositiveInformation { value: information });
    }
    if n == 0 {
        return Err(Error::InvalidInput("photon count must be at least 1".into()));
    }
    Ok(1.0 / (n as f64 * information).sqrt())
}
