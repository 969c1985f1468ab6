//! JSON run configuration in laboratory units.
//!
//! Frequencies are given in THz (read as angular frequencies) and delays in
//! attoseconds; they are converted once, here, to rad/fs and fs.

use std::path::{Path, PathBuf};

use awva_core::units::{as_to_fs, thz_to_rad_per_fs};
use awva_core::{AdaptiveConfig, TimeDelayScenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `steps` evenly spaced points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / last)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.steps == 0 {
            return Err(CliError::Config(format!("{name}: grid needs finite bounds and steps >= 1")));
        }
        if self.steps > 1 && self.min >= self.max {
            return Err(CliError::Config(format!("{name}: min must be below max")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega0_thz: f64,
    pub delta_thz: f64,
    pub tau_as: f64,
    /// Fixed post-selection angle of the baseline scheme, rad.
    pub epsilon_swva: f64,
    pub adaptive: AdaptiveConfig,
    /// Photons per measurement for `sweep-n`.
    pub n_values: Vec<u64>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
    /// Delay interval searched by the maximum-likelihood estimator, as.
    pub swva_search_as: [f64; 2],
    /// Coupling `g` grid of the Fisher surface, rad⁻¹·fs.
    pub fisher_g: GridSpec,
    /// Imaginary weak-value grid of the Fisher surface.
    pub fisher_b: GridSpec,
    /// Post-selection angle grid of the shift surface, rad.
    pub shift_epsilon: GridSpec,
    /// Delay grid of the shift surface, as.
    pub shift_tau_as: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega0_thz: 2400.0,
            delta_thz: 55.0,
            tau_as: 8.0,
            epsilon_swva: 0.03,
            adaptive: AdaptiveConfig::default(),
            n_values: vec![10_000, 100_000, 1_000_000, 10_000_000],
            repetitions: 100,
            master_seed: 1,
            output_path: PathBuf::from("out"),
            swva_search_as: [0.0, 20.0],
            fisher_g: GridSpec { min: 0.001, max: 0.01, steps: 10 },
            fisher_b: GridSpec { min: -500.0, max: -1.0, steps: 500 },
            shift_epsilon: GridSpec { min: 0.002, max: 0.1, steps: 50 },
            shift_tau_as: GridSpec { min: 1.0, max: 20.0, steps: 50 },
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario()?;
        self.adaptive
            .validate()
            .map_err(|e| CliError::Config(format!("adaptive: {e}")))?;
        let e0 = self.adaptive.epsilon_init;
        if !(e0 > 0.0 && e0 < std::f64::consts::PI) {
            return Err(CliError::Config(format!("adaptive.epsilon_init {e0} outside (0, pi)")));
        }
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("n_values must be nonempty and strictly increasing".into()));
        }
        let [lo, hi] = self.swva_search_as;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::Config(format!("bad swva_search_as [{lo}, {hi}]")));
        }
        self.fisher_g.validate("fisher_g")?;
        self.fisher_b.validate("fisher_b")?;
        self.shift_epsilon.validate("shift_epsilon")?;
        self.shift_tau_as.validate("shift_tau_as")?;
        Ok(())
    }

    /// The delay scenario in internal units, at the baseline angle.
    pub fn scenario(&self) -> Result<TimeDelayScenario, CliError> {
        TimeDelayScenario::new(
            thz_to_rad_per_fs(self.omega0_thz),
            thz_to_rad_per_fs(self.delta_thz),
            as_to_fs(self.tau_as),
            self.epsilon_swva,
        )
        .map_err(|e| CliError::Config(format!("scenario: {e}")))
    }

    pub fn swva_search_fs(&self) -> (f64, f64) {
        (as_to_fs(self.swva_search_as[0]), as_to_fs(self.swva_search_as[1]))
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let canonical = Self {
            output_path: PathBuf::new(),
            ..self.clone()
        };
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_convert_to_internal_units() {
        let s = RunConfig::default().scenario().unwrap();
        assert_eq!(s.omega0(), 2.4);
        assert_eq!(s.delta(), 0.055);
        assert_eq!(s.tau(), 0.008);
        assert_eq!(s.epsilon(), 0.03);
        assert_eq!(RunConfig::default().adaptive.step, 1e-6);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"tau_as": 5, "adaptive": {"step": 1e-5}}"#).unwrap();
        assert_eq!(cfg.tau_as, 5.0);
        assert_eq!(cfg.adaptive.step, 1e-5);
        assert_eq!(cfg.adaptive.epsilon_init, 0.03);
        assert_eq!(cfg.repetitions, 100);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"tau": 5}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.n_values = vec![10, 10];
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { repetitions: 0, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { delta_thz: -1.0, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_path_only() {
        let a = RunConfig::default();
        let b = RunConfig { output_path: "elsewhere".into(), ..a.clone() };
        let c = RunConfig { master_seed: 2, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = GridSpec { min: 1.0, max: 20.0, steps: 50 };
        let p = g.points();
        assert_eq!(p.len(), 50);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[49], 20.0);
        assert_eq!(GridSpec { min: 3.0, max: 3.0, steps: 1 }.points(), vec![3.0]);
    }
}
