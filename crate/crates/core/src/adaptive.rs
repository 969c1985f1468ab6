//! Sign-of-shift feedback on the post-selection angle, the fixed-angle
//! baseline, and a grid-plus-golden-section maximum-likelihood estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidityFlag};
use crate::measure::{sample_photons, sample_photons_fast, PhotonBatch};
use crate::optimize::golden_section_max;
use crate::rng::RandomStream;
use crate::time_delay::{estimate_tau, TimeDelayScenario};

/// Grid points of the coarse likelihood scan.
pub const MLE_GRID: usize = 256;
/// Absolute tolerance of the refined delay, fs.
pub const MLE_TOL: f64 = 1e-8;

const FLAT_SPREAD: f64 = 1e-12;
const INIT_RANGE: (f64, f64) = (0.001, 0.1);

/// Where each iteration's spectrum shift comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftSource {
    /// Mean of sampled accepted photons minus `ω₀`.
    Sampled,
    /// The closed-form shift; deterministic, for testing the loop itself.
    NoiseFree,
}

/// Photon sampler used in [`ShiftSource::Sampled`] mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    PerPhoton,
    Envelope,
}

impl SamplerKind {
    pub fn sample(
        self,
        s: &TimeDelayScenario,
        n_input: u64,
        stream: &mut RandomStream,
    ) -> PhotonBatch {
        let m = s.to_measurement_model();
        match self {
            SamplerKind::PerPhoton => sample_photons(&m, n_input, stream),
            SamplerKind::Envelope => sample_photons_fast(&m, n_input, stream),
        }
    }
}

/// Geometric step decay: start at `initial_step`, divide by `factor` on each
/// confirmed sign flip until the configured step is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseToFine {
    pub initial_step: f64,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub epsilon_init: f64,
    pub step: f64,
    pub n_per_iteration: u64,
    pub max_iterations: usize,
    /// Consecutive sign flips required to stop.
    pub confirmations: usize,
    pub coarse_to_fine: Option<CoarseToFine>,
    pub shift_source: ShiftSource,
    pub sampler: SamplerKind,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            epsilon_init: 0.03,
            step: 1e-6,
            n_per_iteration: 10_000,
            max_iterations: 100_000,
            confirmations: 1,
            coarse_to_fine: None,
            shift_source: ShiftSource::Sampled,
            sampler: SamplerKind::Envelope,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.step)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        if self.confirmations == 0 {
            return Err(Error::InvalidInput("confirmations must be at least 1".into()));
        }
        if let Some(c) = self.coarse_to_fine {
            if !(c.initial_step.is_finite() && c.initial_step >= self.step) {
                return Err(Error::InvalidInput(format!(
                    "coarse step {} must be at least the fine step {}",
                    c.initial_step, self.step
                )));
            }
            if !(c.factor.is_finite() && c.factor > 1.0) {
                return Err(Error::InvalidInput(format!(
                    "step decay factor must exceed 1, got {}",
                    c.factor
                )));
            }
        }
        Ok(())
    }

    /// Soft warnings; the run proceeds regardless.
    pub fn warnings(&self) -> Vec<ValidityFlag> {
        if (INIT_RANGE.0..=INIT_RANGE.1).contains(&self.epsilon_init) {
            Vec::new()
        } else {
            vec![ValidityFlag::InitialAngleRange]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub epsilon: f64,
    /// Step applied after this measurement (zero on the stopping iteration).
    pub step: f64,
    /// `None` when no photon was accepted.
    pub delta_omega: Option<f64>,
    pub n_accepted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    SignFlip,
    MaxIterations,
    InsufficientStatistics,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::SignFlip => "sign-flip",
            StopReason::MaxIterations => "max-iterations",
            StopReason::InsufficientStatistics => "insufficient-statistics",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveTrace {
    pub iterations: Vec<IterationRecord>,
    pub epsilon_final: f64,
    /// Present iff `stop_reason` is [`StopReason::SignFlip`].
    pub tau_hat: Option<f64>,
    pub total_photons_used: u64,
    pub stop_reason: StopReason,
}

impl AdaptiveTrace {
    /// The delay estimate, or the error that prevented one.
    pub fn tau_hat(&self) -> Result<f64> {
        match (self.stop_reason, self.tau_hat) {
            (StopReason::SignFlip, Some(t)) => Ok(t),
            (StopReason::InsufficientStatistics, _) => Err(Error::InsufficientStatistics {
                iteration: self.iterations.len().saturating_sub(1),
            }),
            _ => Err(Error::MaxIterations {
                iterations: self.iterations.len(),
            }),
        }
    }
}

/// Runs the feedback loop on `s` (whose `epsilon` is ignored in favour of
/// `cfg.epsilon_init`).
///
/// Each iteration measures `Δω` at the current angle, then moves
/// `ε ← ε + δε` if `Δω > 0` and `ε ← ε − δε` otherwise. The loop stops when
/// the sign of `Δω` has differed from the previous one for
/// `cfg.confirmations` consecutive iterations; the final angle is the one of
/// that last measurement, and `τ̂ = 2ε / (2ω₀ − Δω)`.
///
/// Running out of iterations or accepting no photon ends the trace with the
/// corresponding [`StopReason`] rather than an error.
pub fn run_adaptive(
    s: &TimeDelayScenario,
    cfg: &AdaptiveConfig,
    stream: &mut RandomStream,
) -> Result<AdaptiveTrace> {
    cfg.validate()?;
    let mut current = s.with_epsilon(cfg.epsilon_init)?;
    let mut step = cfg.coarse_to_fine.map_or(cfg.step, |c| c.initial_step);
    let mut iterations = Vec::new();
    let mut total_photons_used = 0u64;
    let mut previous_positive: Option<bool> = None;
    let mut flips = 0;

    let finish = |iterations: Vec<IterationRecord>, epsilon_final, tau_hat, total, reason| {
        Ok(AdaptiveTrace {
            iterations,
            epsilon_final,
            tau_hat,
            total_photons_used: total,
            stop_reason: reason,
        })
    };

    for _ in 0..cfg.max_iterations {
        let epsilon = current.epsilon();
        total_photons_used += cfg.n_per_iteration;
        let (delta_omega, n_accepted) = match cfg.shift_source {
            ShiftSource::NoiseFree => (current.spectrum_shift()?, 0),
            ShiftSource::Sampled => {
                let batch = cfg.sampler.sample(&current, cfg.n_per_iteration, stream);
                match batch.mean() {
                    Some(mean) => (mean - current.omega0(), batch.n_accepted),
                    None => {
                        iterations.push(IterationRecord {
                            epsilon,
                            step: 0.0,
                            delta_omega: None,
                            n_accepted: 0,
                        });
                        return finish(
                            iterations,
                            epsilon,
                            None,
                            total_photons_used,
                            StopReason::InsufficientStatistics,
                        );
                    }
                }
            }
        };

        let positive = delta_omega > 0.0;
        match previous_positive {
            Some(p) if p != positive => flips += 1,
            _ => flips = 0,
        }
        previous_positive = Some(positive);

        if flips >= cfg.confirmations {
            if step > cfg.step {
                let factor = cfg.coarse_to_fine.map_or(1.0, |c| c.factor);
                step = (step / factor).max(cfg.step);
                flips = 0;
            } else {
                iterations.push(IterationRecord {
                    epsilon,
                    step: 0.0,
                    delta_omega: Some(delta_omega),
                    n_accepted,
                });
                let tau_hat = estimate_tau(epsilon, delta_omega, current.omega0())?;
                return finish(
                    iterations,
                    epsilon,
                    Some(tau_hat),
                    total_photons_used,
                    StopReason::SignFlip,
                );
            }
        }

        iterations.push(IterationRecord {
            epsilon,
            step,
            delta_omega: Some(delta_omega),
            n_accepted,
        });
        let next = if positive { epsilon + step } else { epsilon - step };
        current = current.with_epsilon(next)?;
    }

    let epsilon_final = iterations.last().map_or(cfg.epsilon_init, |r| r.epsilon);
    finish(
        iterations,
        epsilon_final,
        None,
        total_photons_used,
        StopReason::MaxIterations,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub tau: f64,
    /// The maximum sits at an end of the search interval.
    pub at_boundary: bool,
    pub log_likelihood: f64,
}

/// Maximum-likelihood delay for a batch of accepted frequencies sampled from
/// `s` with unknown `τ`, searched over `search = (lo, hi)` fs.
pub fn mle_estimate(
    batch: &PhotonBatch,
    s: &TimeDelayScenario,
    search: (f64, f64),
) -> Result<MleEstimate> {
    if batch.accepted_x.is_empty() {
        return Err(Error::InsufficientStatistics { iteration: 0 });
    }
    let (lo, hi) = search;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!("bad search interval [{lo}, {hi}]")));
    }

    let pointer = s.pointer();
    let base: f64 = batch.accepted_x.iter().map(|&x| pointer.ln_pdf(x)).sum();
    let n = batch.accepted_x.len() as f64;
    // Σ ln P(x | τ) without the τ-independent pointer term
    let log_likelihood = |tau: f64| -> f64 {
        let Ok(candidate) = s.with_tau(tau) else {
            return f64::NEG_INFINITY;
        };
        let m = candidate.to_measurement_model();
        let p_d = match m.postselect_probability() {
            Ok(p) if p > 0.0 => p,
            _ => return f64::NEG_INFINITY,
        };
        let acc: f64 = batch
            .accepted_x
            .iter()
            .map(|&x| m.acceptance_probability(x).ln())
            .sum();
        acc - n * p_d.ln()
    };

    let h = (hi - lo) / (MLE_GRID - 1) as f64;
    let grid: Vec<f64> = (0..MLE_GRID).map(|i| lo + h * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| log_likelihood(t)).collect();
    let (best, &best_value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = best_value - worst;
    if !best_value.is_finite() || spread < FLAT_SPREAD {
        return Err(Error::FlatLikelihood {
            spread: if spread.is_nan() { 0.0 } else { spread },
        });
    }

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(MLE_GRID - 1)];
    let (tau, value) = golden_section_max(&log_likelihood, a, b, MLE_TOL);
    let (tau, value) = if value >= best_value {
        (tau, value)
    } else {
        (grid[best], best_value)
    };
    let at_boundary = tau - lo <= MLE_TOL || hi - tau <= MLE_TOL;
    Ok(MleEstimate {
        tau,
        at_boundary,
        log_likelihood: value + base,
    })
}

/// One fixed-angle measurement of `n_input` photons at `s.epsilon()`,
/// followed by [`mle_estimate`].
pub fn run_swva(
    s: &TimeDelayScenario,
    n_input: u64,
    stream: &mut RandomStream,
    search: (f64, f64),
) -> Result<MleEstimate> {
    if n_input == 0 {
        return Err(Error::InsufficientStatistics { iteration: 0 });
    }
    let batch = SamplerKind::Envelope.sample(s, n_input, stream);
    mle_estimate(&batch, s, search)
}
