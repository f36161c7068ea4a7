use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BuiltinSpec, ModelConfig};
use crate::simulate::{CouplingMode, InitialLaw, StepPlan};

/// Which contraction result the experiment is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineChoice {
    /// `W1` bound `C e^{−γt}` from the concave profile.
    #[default]
    Pipeline1,
    /// `W_ρ₁` bound `e^{−ct}` under dissipativity.
    Pipeline2,
}

impl std::str::FromStr for PipelineChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "pipeline1" => Ok(Self::Pipeline1),
            "2" | "pipeline2" => Ok(Self::Pipeline2),
            _ => Err(Error::InvalidInput(format!("unknown pipeline {s:?}, expected 1 or 2"))),
        }
    }
}

/// Everything an experiment run depends on. Missing JSON fields take the
/// defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub pipeline: PipelineChoice,
    /// Particles per system.
    pub n: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Steps between records.
    pub stride: usize,
    pub seed: u64,
    pub replicates: usize,
    pub delta: f64,
    pub mode: CouplingMode,
    pub initial_x: InitialLaw,
    pub initial_y: InitialLaw,
    /// Particles entering the exact `W_ρ` / `W_ρ₁` assignment.
    pub rho_sample: usize,
    /// `W_ρ` is evaluated on every `rho_every`-th record.
    pub rho_every: usize,
    /// Ensemble sizes for the chaos experiment.
    pub n_grid: Vec<usize>,
    /// Reference size is `ref_factor · max(n_grid)`.
    pub ref_factor: usize,
    /// Largest size solved by exact assignment in the chaos experiment.
    pub exact_cap: usize,
    /// Time lags of the ergodic Cauchy check.
    pub cauchy_lags: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::new(BuiltinSpec::mean_field_ou(1, 0.1)),
            pipeline: PipelineChoice::Pipeline1,
            n: 2000,
            h: 0.01,
            horizon: 20.0,
            stride: 10,
            seed: 0,
            replicates: 8,
            delta: 1e-3,
            mode: CouplingMode::Mixed,
            initial_x: InitialLaw::point(vec![-2.0]),
            initial_y: InitialLaw::point(vec![2.0]),
            rho_sample: 256,
            rho_every: 5,
            n_grid: vec![64, 128, 256, 512, 1024, 2048],
            ref_factor: 4,
            exact_cap: 2048,
            cauchy_lags: vec![1.0, 2.0, 5.0],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn plan(&self) -> Result<StepPlan> {
        StepPlan::new(self.h, self.horizon, self.stride, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.replicates == 0 {
            return bad("replicates must be ≥ 1".into());
        }
        if self.n == 0 {
            return bad("n must be ≥ 1".into());
        }
        if self.rho_every == 0 {
            return bad("rho_every must be ≥ 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("δ must lie in (0, 1), got {}", self.delta));
        }
        if self.n_grid.contains(&0) {
            return bad("n_grid entries must be ≥ 1".into());
        }
        self.plan().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c = ExperimentConfig::from_json(r#"{"n": 50, "T": 1.0, "mode": "synchronous"}"#).unwrap();
        assert_eq!(c.n, 50);
        assert_eq!(c.horizon, 1.0);
        assert_eq!(c.mode, CouplingMode::Synchronous);
        assert_eq!(c.h, 0.01);
        assert!(ExperimentConfig::from_json(r#"{"n_particles": 5}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.replicates = 0;
        assert!(c.validate().is_err());
        c.replicates = 1;
        c.horizon = 0.015;
        assert!(c.validate().is_err());
    }
}
