//! Post-selected pointer statistics and photon sampling.
//!
//! After coupling and post-selection the unnormalised pointer density is
//! `ν P₀(x) ζ(x, g)` with
//!
//! `ζ(x, g) = cos²(xg) + sin²(xg)|A_w|² + sin(2xg) Im A_w`,
//!
//! and `ν ζ(x, g)` is the probability that a photon with pointer value `x`
//! survives the projection. The normaliser `P_d = ∫ ν P₀ ζ dx` is the overall
//! post-selection probability.

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::{
    overlap_probability, weak_value, CouplingConfig, GaussianPointer, TwoLevelState, WeakValue,
};
use crate::quadrature::{integrate_panels, Tolerance, DEFAULT_REL_TOL, POINTER_SUPPORT_SIGMAS};
use crate::rng::RandomStream;

const PANELS: usize = 8;
const ENVELOPE_GRID: usize = 1024;

/// `ζ(x, g)` for a given weak value.
pub fn zeta(x: f64, g: f64, aw: WeakValue) -> f64 {
    let (s, c) = (x * g).sin_cos();
    c * c + s * s * aw.norm_sqr() + (2.0 * x * g).sin() * aw.im
}

/// `∂ζ/∂g = −x sin(2xg) + x sin(2xg)|A_w|² + 2x cos(2xg) Im A_w`.
pub fn zeta_dg(x: f64, g: f64, aw: WeakValue) -> f64 {
    let (s2, c2) = (2.0 * x * g).sin_cos();
    x * s2 * (aw.norm_sqr() - 1.0) + 2.0 * x * c2 * aw.im
}

/// Full measurement configuration: pointer, pre/post-selection and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementModel {
    pointer: GaussianPointer,
    pre: TwoLevelState,
    post: TwoLevelState,
    coupling: CouplingConfig,
    overlap: f64,
    weak_value: WeakValue,
}

impl MeasurementModel {
    pub fn new(
        pointer: GaussianPointer,
        pre: TwoLevelState,
        post: TwoLevelState,
        coupling: CouplingConfig,
    ) -> Result<Self> {
        let weak_value = weak_value(&pre, &post)?;
        Ok(Self {
            pointer,
            pre,
            post,
            coupling,
            overlap: overlap_probability(&pre, &post),
            weak_value,
        })
    }

    pub fn pointer(&self) -> &GaussianPointer {
        &self.pointer
    }

    pub fn pre(&self) -> &TwoLevelState {
        &self.pre
    }

    pub fn post(&self) -> &TwoLevelState {
        &self.post
    }

    pub fn g(&self) -> f64 {
        self.coupling.g
    }

    /// Same states and pointer, different coupling.
    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Ok(Self {
            coupling: CouplingConfig::new(g)?,
            ..*self
        })
    }

    /// `ν = |⟨φ_f|φ_i⟩|²`.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn weak_value(&self) -> WeakValue {
        self.weak_value
    }

    pub fn weak_coupling_violated(&self) -> bool {
        self.coupling.violates_weak_coupling(&self.pointer)
    }

    pub fn zeta(&self, x: f64) -> f64 {
        zeta(x, self.coupling.g, self.weak_value)
    }

    pub fn zeta_dg(&self, x: f64) -> f64 {
        zeta_dg(x, self.coupling.g, self.weak_value)
    }

    /// Probability `ν ζ(x, g)` that a photon at `x` survives post-selection.
    pub fn acceptance_probability(&self, x: f64) -> f64 {
        self.overlap * self.zeta(x)
    }

    /// Integrates `f` over the pointer window `x₀ ± 10Δ`.
    pub(crate) fn integrate_pointer<F: FnMut(f64) -> f64>(&self, f: F, rel: f64) -> Result<f64> {
        let (lo, hi) = self.pointer.support(POINTER_SUPPORT_SIGMAS);
        Ok(integrate_panels(f, lo, hi, PANELS, Tolerance::relative(rel))?.value)
    }

    /// `P_d = ∫ ν P₀(x) ζ(x, g) dx`.
    pub fn postselect_probability(&self) -> Result<f64> {
        let p = self.integrate_pointer(
            |x| self.pointer.pdf(x) * self.acceptance_probability(x),
            DEFAULT_REL_TOL,
        )?;
        Ok(p.clamp(0.0, 1.0))
    }

    /// `∂P_d/∂g` with the weak value held fixed.
    pub fn postselect_probability_dg(&self) -> Result<f64> {
        self.integrate_pointer(
            |x| self.pointer.pdf(x) * self.overlap * self.zeta_dg(x),
            DEFAULT_REL_TOL,
        )
    }

    /// The normalised post-selected density, with `P_d` evaluated once.
    pub fn post_distribution(&self) -> Result<PostDistribution> {
        let p_d = self.postselect_probability()?;
        if p_d <= 0.0 {
            return Err(Error::DegenerateModel { p_d });
        }
        Ok(PostDistribution { model: *self, p_d })
    }

    /// `P(x, g) = ν P₀(x) ζ(x, g) / P_d`.
    pub fn post_density(&self, x: f64) -> Result<f64> {
        Ok(self.post_distribution()?.pdf(x))
    }
}

/// Post-selected pointer density with a cached normaliser.
#[derive(Debug, Clone, Copy)]
pub struct PostDistribution {
    model: MeasurementModel,
    p_d: f64,
}

impl PostDistribution {
    pub fn postselect_probability(&self) -> f64 {
        self.p_d
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.model.pointer.pdf(x) * self.model.acceptance_probability(x) / self.p_d
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.model.pointer.ln_pdf(x) + self.model.acceptance_probability(x).ln() - self.p_d.ln()
    }

    /// Mean of the post-selected pointer.
    pub fn mean(&self) -> Result<f64> {
        let x0 = self.model.pointer.mean();
        let shift = self
            .model
            .integrate_pointer(|x| (x - x0) * self.pdf(x), DEFAULT_REL_TOL)?;
        Ok(x0 + shift)
    }
}

/// Photons that survived post-selection out of `n_input` sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonBatch {
    pub accepted_x: Vec<f64>,
    pub n_input: u64,
    pub n_accepted: u64,
    pub seed: u64,
    pub stream_id: u64,
}

impl PhotonBatch {
    pub fn acceptance_fraction(&self) -> f64 {
        if self.n_input == 0 {
            0.0
        } else {
            self.n_accepted as f64 / self.n_input as f64
        }
    }

    /// Mean accepted pointer value, `None` for an empty batch.
    pub fn mean(&self) -> Option<f64> {
        if self.accepted_x.is_empty() {
            return None;
        }
        Some(self.accepted_x.iter().sum::<f64>() / self.accepted_x.len() as f64)
    }
}

fn checked_acceptance(m: &MeasurementModel, x: f64) -> f64 {
    let p = m.acceptance_probability(x);
    assert!(
        (-1e-12..=1.0 + 1e-9).contains(&p),
        "acceptance probability {p} at x = {x} is not a probability"
    );
    p
}

/// Photon-by-photon simulation: draw `x ~ P₀`, keep it with probability
/// `ν ζ(x, g)`.
pub fn sample_photons(m: &MeasurementModel, n_input: u64, stream: &mut RandomStream) -> PhotonBatch {
    let mean = m.pointer.mean();
    let sd = m.pointer.std_dev();
    let mut accepted_x = Vec::new();
    for _ in 0..n_input {
        let z: f64 = StandardNormal.sample(stream);
        let x = mean + sd * z;
        let p = checked_acceptance(m, x);
        if stream.random::<f64>() < p {
            accepted_x.push(x);
        }
    }
    PhotonBatch {
        n_accepted: accepted_x.len() as u64,
        accepted_x,
        n_input,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
    }
}

/// Upper bound of `ν ζ` on `[lo, hi]` from a grid maximum plus a Lipschitz
/// margin, capped at 1.
fn acceptance_bound(m: &MeasurementModel, lo: f64, hi: f64) -> f64 {
    let aw = m.weak_value;
    let lipschitz = m.overlap * m.g().abs() * ((aw.norm_sqr() - 1.0).abs() + 2.0 * aw.im.abs());
    let h = (hi - lo) / (ENVELOPE_GRID - 1) as f64;
    let grid_max = (0..ENVELOPE_GRID)
        .map(|i| m.acceptance_probability(lo + h * i as f64))
        .fold(0.0, f64::max);
    (grid_max + 0.5 * lipschitz * h).min(1.0)
}

// Standard normal conditioned on z > a (a > 0), Marsaglia's tail method.
fn normal_tail<R: Rng>(a: f64, rng: &mut R) -> f64 {
    loop {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let z = (a * a - 2.0 * u1.ln()).sqrt();
        if u2 * z < a {
            return z;
        }
    }
}

/// Same distribution as [`sample_photons`], with work proportional to the
/// number of surviving photons rather than the number sent.
///
/// The line is split into the bulk `x₀ ± 10Δ`, where `ν ζ` is bounded by a
/// computed constant `c`, and the two tails, bounded by 1. A photon passes
/// this envelope with probability `q = c·P₀(bulk) + P₀(tail)`, so the number
/// of envelope passes is `Binomial(n_input, q)`; each pass is then thinned
/// with probability `ν ζ(x) / envelope(x)`.
pub fn sample_photons_fast(
    m: &MeasurementModel,
    n_input: u64,
    stream: &mut RandomStream,
) -> PhotonBatch {
    let mean = m.pointer.mean();
    let sd = m.pointer.std_dev();
    let k = POINTER_SUPPORT_SIGMAS;
    let (lo, hi) = m.pointer.support(k);
    let bulk_bound = acceptance_bound(m, lo, hi);
    let tail_mass = erfc(k / std::f64::consts::SQRT_2);
    let bulk_weight = bulk_bound * (1.0 - tail_mass);
    let q = (bulk_weight + tail_mass).min(1.0);

    let passes = Binomial::new(n_input, q)
        .expect("envelope probability lies in [0, 1]")
        .sample(stream);

    let mut accepted_x = Vec::new();
    for _ in 0..passes {
        let (x, envelope) = if stream.random::<f64>() * q < tail_mass {
            let z = normal_tail(k, stream);
            let z = if stream.random::<bool>() { z } else { -z };
            (mean + sd * z, 1.0)
        } else {
            let z = loop {
                let z: f64 = StandardNormal.sample(stream);
                if z.abs() <= k {
                    break z;
                }
            };
            (mean + sd * z, bulk_bound)
        };
        let p = checked_acceptance(m, x);
        debug_assert!(p <= envelope * (1.0 + 1e-9));
        if stream.random::<f64>() * envelope < p {
            accepted_x.push(x);
        }
    }
    PhotonBatch {
        n_accepted: accepted_x.len() as u64,
        accepted_x,
        n_input,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
    }
}
