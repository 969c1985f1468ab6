//! Python bindings for the weak-value amplification toolkit.
//!
//! Errors from the core crate surface as `awva.AwvaError`, a subclass of
//! `ValueError`. Random draws take a `seed` and a `stream` index; equal
//! pairs give equal results.

use awva_core as core;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(awva, AwvaError, PyValueError);

fn err(e: core::Error) -> PyErr {
    AwvaError::new_err(e.to_string())
}

fn flag_names(flags: &[core::ValidityFlag]) -> Vec<String> {
    flags.iter().map(ToString::to_string).collect()
}

fn stream(seed: u64, index: u64) -> core::RandomStream {
    core::RandomStream::new(seed).child(index)
}

/// Gaussian pointer `N(mean, variance)`.
#[pyclass(name = "GaussianPointer", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyPointer(core::GaussianPointer);

#[pymethods]
impl PyPointer {
    #[new]
    fn new(mean: f64, variance: f64) -> PyResult<Self> {
        core::GaussianPointer::new(mean, variance).map(Self).map_err(err)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.0.variance()
    }

    #[getter]
    fn second_moment(&self) -> f64 {
        self.0.second_moment()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }

    fn __repr__(&self) -> String {
        format!("GaussianPointer(mean={}, variance={})", self.0.mean(), self.0.variance())
    }
}

/// Two-level state `cos(θ/2)|−1⟩ + e^{iφ} sin(θ/2)|+1⟩`.
#[pyclass(name = "TwoLevelState", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyState(core::TwoLevelState);

#[pymethods]
impl PyState {
    #[new]
    fn new(theta: f64, phase: f64) -> PyResult<Self> {
        core::TwoLevelState::new(theta, phase).map(Self).map_err(err)
    }

    #[staticmethod]
    fn equatorial(phase: f64) -> PyResult<Self> {
        core::TwoLevelState::equatorial(phase).map(Self).map_err(err)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn phase(&self) -> f64 {
        self.0.phase()
    }

    fn __repr__(&self) -> String {
        format!("TwoLevelState(theta={}, phase={})", self.0.theta(), self.0.phase())
    }
}

#[pyfunction]
fn weak_value(pre: PyState, post: PyState) -> PyResult<Complex64> {
    core::weak_value(&pre.0, &post.0).map(|w| w.to_complex()).map_err(err)
}

#[pyfunction]
fn overlap_probability(pre: PyState, post: PyState) -> f64 {
    core::overlap_probability(&pre.0, &post.0)
}

/// Pre/post-selected pair realising `weak_value`.
#[pyfunction]
fn states_for_weak_value(weak_value: Complex64) -> PyResult<(PyState, PyState)> {
    let aw = core::WeakValue::new(weak_value.re, weak_value.im).map_err(err)?;
    let (pre, post) = core::states_for_weak_value(aw).map_err(err)?;
    Ok((PyState(pre), PyState(post)))
}

/// Post-selected weak measurement of a Gaussian pointer.
#[pyclass(name = "MeasurementModel", frozen)]
pub struct PyModel(core::MeasurementModel);

#[pymethods]
impl PyModel {
    #[new]
    fn new(pointer: PyPointer, pre: PyState, post: PyState, g: f64) -> PyResult<Self> {
        let coupling = core::CouplingConfig::new(g).map_err(err)?;
        core::MeasurementModel::new(pointer.0, pre.0, post.0, coupling)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.g()
    }

    #[getter]
    fn overlap(&self) -> f64 {
        self.0.overlap()
    }

    #[getter]
    fn weak_value(&self) -> Complex64 {
        self.0.weak_value().to_complex()
    }

    fn weak_coupling_violated(&self) -> bool {
        self.0.weak_coupling_violated()
    }

    /// Probability that a photon at pointer value `x` is accepted.
    fn acceptance_probability(&self, x: f64) -> f64 {
        self.0.acceptance_probability(x)
    }

    fn postselect_probability(&self) -> PyResult<f64> {
        self.0.postselect_probability().map_err(err)
    }

    fn post_density(&self, x: f64) -> PyResult<f64> {
        self.0.post_density(x).map_err(err)
    }

    fn post_mean(&self) -> PyResult<f64> {
        self.0.post_distribution().and_then(|d| d.mean()).map_err(err)
    }

    /// Fisher information about `g`, by quadrature.
    fn fisher_information(&self) -> PyResult<(f64, Vec<String>)> {
        let r = core::fisher_numeric(&self.0).map_err(err)?;
        Ok((r.value, flag_names(&r.validity_flags)))
    }

    /// Accepted pointer values out of `n_input` photons sent.
    #[pyo3(signature = (n_input, seed, stream_index=0, per_photon=false))]
    fn sample(&self, n_input: u64, seed: u64, stream_index: u64, per_photon: bool) -> Vec<f64> {
        let mut s = stream(seed, stream_index);
        let batch = if per_photon {
            core::sample_photons(&self.0, n_input, &mut s)
        } else {
            core::sample_photons_fast(&self.0, n_input, &mut s)
        };
        batch.accepted_x
    }
}

#[pyfunction]
fn fisher_closed_imag(pointer: PyPointer, g: f64, b: f64) -> PyResult<f64> {
    core::fisher_closed_imag(&pointer.0, g, b).map(|r| r.value).map_err(err)
}

/// Imaginary weak value that maximises the information about `g`.
#[pyfunction]
fn optimal_imag_weak_value(pointer: PyPointer, g: f64) -> PyResult<Complex64> {
    core::optimal_imag_weak_value(&pointer.0, g)
        .map(|w| w.to_complex())
        .map_err(err)
}

#[pyfunction]
fn qfi_closed(pointer: PyPointer, theta_i: f64) -> f64 {
    core::qfi_closed(&pointer.0, theta_i).value
}

#[pyfunction]
fn qfi_numeric(pointer: PyPointer, theta_i: f64, g: f64) -> PyResult<f64> {
    core::qfi_numeric(&pointer.0, theta_i, g).map(|r| r.value).map_err(err)
}

#[pyfunction]
fn error_limit(information: f64, n: u64) -> PyResult<f64> {
    core::error_limit(information, n).map_err(err)
}

#[pyfunction]
fn estimate_tau(epsilon: f64, delta_omega: f64, omega0: f64) -> PyResult<f64> {
    core::estimate_tau(epsilon, delta_omega, omega0).map_err(err)
}

#[pyfunction]
fn thz_to_rad_per_fs(v: f64) -> f64 {
    core::units::thz_to_rad_per_fs(v)
}

#[pyfunction]
fn as_to_fs(v: f64) -> f64 {
    core::units::as_to_fs(v)
}

/// Optical time-delay measurement. Frequencies in rad/fs, `tau` in fs.
#[pyclass(name = "TimeDelayScenario", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyScenario(core::TimeDelayScenario);

#[pymethods]
impl PyScenario {
    #[new]
    fn new(omega0: f64, delta: f64, tau: f64, epsilon: f64) -> PyResult<Self> {
        core::TimeDelayScenario::new(omega0, delta, tau, epsilon)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.0.omega0()
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    fn with_epsilon(&self, epsilon: f64) -> PyResult<Self> {
        self.0.with_epsilon(epsilon).map(Self).map_err(err)
    }

    fn with_tau(&self, tau: f64) -> PyResult<Self> {
        self.0.with_tau(tau).map(Self).map_err(err)
    }

    fn validity_flags(&self) -> Vec<String> {
        flag_names(&self.0.validity_flags())
    }

    fn measurement_model(&self) -> PyModel {
        PyModel(self.0.to_measurement_model())
    }

    fn spectrum_density(&self, omega: f64) -> f64 {
        self.0.spectrum_density(omega)
    }

    /// Mean frequency shift of the accepted spectrum.
    fn spectrum_shift(&self) -> PyResult<f64> {
        self.0.spectrum_shift().map_err(err)
    }

    /// Linearised shift and the approximations it violates.
    fn spectrum_shift_linear(&self) -> PyResult<(f64, Vec<String>)> {
        let v = self.0.spectrum_shift_linear().map_err(err)?;
        Ok((v.value, flag_names(&v.validity_flags)))
    }

    fn epsilon_opt(&self) -> f64 {
        self.0.epsilon_opt()
    }

    fn zero_shift_epsilon(&self) -> f64 {
        self.0.zero_shift_epsilon()
    }

    fn fisher_tau(&self) -> PyResult<f64> {
        self.0.fisher_tau().map(|r| r.value).map_err(err)
    }

    fn max_information_tau(&self) -> f64 {
        self.0.max_information_tau()
    }

    fn swva_information_tau(&self) -> f64 {
        self.0.swva_information_tau()
    }

    fn __repr__(&self) -> String {
        format!(
            "TimeDelayScenario(omega0={}, delta={}, tau={}, epsilon={})",
            self.0.omega0(),
            self.0.delta(),
            self.0.tau(),
            self.0.epsilon()
        )
    }
}

/// Result of the sign-of-shift feedback loop.
#[pyclass(name = "AdaptiveTrace", frozen)]
pub struct PyTrace(core::AdaptiveTrace);

#[pymethods]
impl PyTrace {
    #[getter]
    fn epsilon_final(&self) -> f64 {
        self.0.epsilon_final
    }

    /// Delay estimate, `None` unless the loop stopped on a sign flip.
    #[getter]
    fn tau_hat(&self) -> Option<f64> {
        self.0.tau_hat
    }

    #[getter]
    fn stop_reason(&self) -> String {
        self.0.stop_reason.to_string()
    }

    #[getter]
    fn total_photons_used(&self) -> u64 {
        self.0.total_photons_used
    }

    /// `(epsilon, step, delta_omega, n_accepted)` per iteration.
    #[getter]
    fn iterations(&self) -> Vec<(f64, f64, Option<f64>, u64)> {
        self.0
            .iterations
            .iter()
            .map(|r| (r.epsilon, r.step, r.delta_omega, r.n_accepted))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.iterations.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "AdaptiveTrace(iterations={}, epsilon_final={}, stop_reason='{}')",
            self.0.iterations.len(),
            self.0.epsilon_final,
            self.0.stop_reason
        )
    }
}

/// Runs the feedback loop from `epsilon_init`.
///
/// With `noise_free` the measured shift is the exact mean shift instead of a
/// sample mean. `coarse_to_fine` is an optional `(initial_step, factor)`.
#[pyfunction]
#[pyo3(signature = (
    scenario, *, epsilon_init=0.03, step=1e-6, n_per_iteration=10_000,
    max_iterations=100_000, confirmations=1, coarse_to_fine=None,
    noise_free=false, per_photon=false, seed=1, stream_index=0,
))]
#[allow(clippy::too_many_arguments)]
fn run_adaptive(
    py: Python<'_>,
    scenario: PyScenario,
    epsilon_init: f64,
    step: f64,
    n_per_iteration: u64,
    max_iterations: usize,
    confirmations: usize,
    coarse_to_fine: Option<(f64, f64)>,
    noise_free: bool,
    per_photon: bool,
    seed: u64,
    stream_index: u64,
) -> PyResult<PyTrace> {
    let cfg = core::AdaptiveConfig {
        epsilon_init,
        step,
        n_per_iteration,
        max_iterations,
        confirmations,
        coarse_to_fine: coarse_to_fine.map(|(initial_step, factor)| core::CoarseToFine {
            initial_step,
            factor,
        }),
        shift_source: if noise_free {
            core::ShiftSource::NoiseFree
        } else {
            core::ShiftSource::Sampled
        },
        sampler: if per_photon {
            core::SamplerKind::PerPhoton
        } else {
            core::SamplerKind::Envelope
        },
    };
    let mut s = stream(seed, stream_index);
    py.detach(|| core::run_adaptive(&scenario.0, &cfg, &mut s))
        .map(PyTrace)
        .map_err(err)
}

/// Fixed-angle baseline: maximum-likelihood delay from `n_input` photons.
/// Returns `(tau, at_boundary, log_likelihood)`.
#[pyfunction]
#[pyo3(signature = (scenario, n_input, search, *, seed=1, stream_index=0))]
fn run_swva(
    py: Python<'_>,
    scenario: PyScenario,
    n_input: u64,
    search: (f64, f64),
    seed: u64,
    stream_index: u64,
) -> PyResult<(f64, bool, f64)> {
    let mut s = stream(seed, stream_index);
    py.detach(|| core::run_swva(&scenario.0, n_input, &mut s, search))
        .map(|m| (m.tau, m.at_boundary, m.log_likelihood))
        .map_err(err)
}

#[pymodule]
mod awva {
    #[pymodule_export]
    use super::{
        as_to_fs, error_limit, estimate_tau, fisher_closed_imag, optimal_imag_weak_value,
        overlap_probability, qfi_closed, qfi_numeric, run_adaptive, run_swva,
        states_for_weak_value, thz_to_rad_per_fs, weak_value, AwvaError, PyModel, PyPointer,
        PyScenario, PyState, PyTrace,
    };
}
