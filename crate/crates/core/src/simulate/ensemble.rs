use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::mat_vec;
use crate::model::CoefficientModel;
use crate::rng::{task_rng, NoiseSource};
use crate::transport::EmpiricalMeasure;

/// Fixed-step schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub h: f64,
    pub steps: usize,
    /// Record every `stride` steps (the final step is always recorded).
    pub stride: usize,
    pub seed: u64,
}

impl StepPlan {
    /// Plan with `steps = round(T/h)`; `h·steps` must reproduce `T`.
    pub fn new(h: f64, horizon: f64, stride: usize, seed: u64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("need h > 0 and T ≥ 0, got h = {h}, T = {horizon}")));
        }
        let steps = (horizon / h).round() as usize;
        if (steps as f64 * h - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::InvalidInput(format!("T = {horizon} is not a multiple of h = {h}")));
        }
        Ok(Self { h, steps, stride: stride.max(1), seed })
    }

    pub fn horizon(&self) -> f64 {
        self.h * self.steps as f64
    }
}

/// Initial law of a particle system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    /// Point mass.
    Point { at: Vec<f64> },
    /// `N(mean, std² I)`.
    Gaussian { mean: Vec<f64>, std: f64 },
    /// Point cloud from CSV; used as is when its size equals `N`,
    /// otherwise resampled with replacement.
    File { path: PathBuf },
}

impl InitialLaw {
    pub fn point(at: Vec<f64>) -> Self {
        Self::Point { at }
    }

    pub fn sample(&self, n: usize, dim: usize, seed: u64, salt: u64) -> Result<Vec<f64>> {
        let check = |v: &[f64]| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(Error::SizeMismatch(format!("initial law has dimension {}, model has {dim}", v.len())))
            }
        };
        match self {
            Self::Point { at } => {
                check(at)?;
                Ok(at.iter().copied().cycle().take(n * dim).collect())
            }
            Self::Gaussian { mean, std } => {
                check(mean)?;
                if !(*std >= 0.0) {
                    return Err(Error::InvalidInput(format!("std must be ≥ 0, got {std}")));
                }
                let mut rng = task_rng(seed, salt);
                let mut out = Vec::with_capacity(n * dim);
                for _ in 0..n {
                    for m in mean {
                        let z: f64 = rng.sample(StandardNormal);
                        out.push(m + std * z);
                    }
                }
                Ok(out)
            }
            Self::File { path } => {
                let cloud = EmpiricalMeasure::from_csv_path(path)?;
                if cloud.dim() != dim {
                    return Err(Error::SizeMismatch(format!("cloud dimension {} vs model {dim}", cloud.dim())));
                }
                if cloud.len() == n {
                    return Ok(cloud.points().to_vec());
                }
                let mut rng = task_rng(seed, salt);
                let mut out = Vec::with_capacity(n * dim);
                for _ in 0..n {
                    out.extend_from_slice(cloud.point(rng.random_range(0..cloud.len())));
                }
                Ok(out)
            }
        }
    }
}

/// Recorded state of one or more systems.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    /// `systems × N × d`, row-major.
    pub states: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub dim: usize,
    pub systems: usize,
    pub h: f64,
    pub snapshots: Vec<Snapshot>,
}

pub(crate) struct Scratch {
    pub b: Vec<f64>,
    pub b2: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub nx: Vec<f64>,
    pub ny: Vec<f64>,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub tmp: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub sigma2: DMatrix<f64>,
    pub inv: DMatrix<f64>,
}

impl Scratch {
    pub fn new(d: usize) -> Self {
        Self {
            b: vec![0.0; d],
            b2: vec![0.0; d],
            xi1: vec![0.0; d],
            xi2: vec![0.0; d],
            nx: vec![0.0; d],
            ny: vec![0.0; d],
            u: vec![0.0; d],
            z: vec![0.0; d],
            tmp: vec![0.0; d],
            sigma: DMatrix::zeros(d, d),
            sigma2: DMatrix::zeros(d, d),
            inv: DMatrix::zeros(d, d),
        }
    }
}

/// Minimum particles per parallel work item.
pub(crate) const MIN_CHUNK: usize = 256;

/// `N` interacting particles advanced with the empirical law `μ̂ⁿ`.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    model: CoefficientModel,
    pub(crate) states: Vec<f64>,
    pub(crate) next: Vec<f64>,
    n: usize,
    pub(crate) time: f64,
    pub(crate) step: u64,
    tag: u8,
}

impl ParticleEnsemble {
    /// `states` is row-major `N × d`; `tag` names the noise stream family.
    pub fn new(model: CoefficientModel, states: Vec<f64>, tag: u8) -> Result<Self> {
        let d = model.dim();
        if states.is_empty() || !states.len().is_multiple_of(d) {
            return Err(Error::InvalidInput(format!("{} state values do not form N ≥ 1 rows of d = {d}", states.len())));
        }
        if let Some(i) = states.iter().position(|v| !v.is_finite()) {
            return Err(Error::Explosion { particle: i / d, step: 0 });
        }
        let n = states.len() / d;
        Ok(Self { model, next: vec![0.0; states.len()], states, n, time: 0.0, step: 0, tag })
    }

    pub fn from_law(model: CoefficientModel, law: &InitialLaw, n: usize, seed: u64, tag: u8) -> Result<Self> {
        let states = law.sample(n, model.dim(), seed, tag as u64)?;
        Self::new(model, states, tag)
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.states[i * d..(i + 1) * d]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn tag(&self) -> u8 {
        self.tag
    }

    pub fn empirical(&self) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(self.states.clone(), self.dim()).expect("ensemble states are finite")
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { step: self.step, time: self.time, states: self.states.clone() }
    }

    /// One Euler–Maruyama step `X_i += b(X_i, μ̂ⁿ)h + σ(X_i)ξ_i`, `ξ_i ~ N(0, hI)`.
    pub fn step(&mut self, plan: &StepPlan) -> Result<()> {
        let d = self.dim();
        let h = plan.h;
        let sqrt_h = h.sqrt();
        let noise = NoiseSource::new(plan.seed);
        let (tag, step) = (self.tag, self.step);
        let model = &self.model;
        let const_sigma = model.diffusion_is_constant().then(|| model.sigma_matrix(&vec![0.0; d]));
        let summary = model.summarize(&self.states);
        let states = &self.states;
        let law = summary.view(states, d);

        self.next
            .par_chunks_mut(d)
            .enumerate()
            .with_min_len(MIN_CHUNK)
            .try_for_each_init(
                || Scratch::new(d),
                |s, (i, out)| {
                    let x = &states[i * d..(i + 1) * d];
                    model.drift(x, &law, &mut s.b);
                    noise.fill_normals(tag, 0, i, step, sqrt_h, &mut s.xi1);
                    let sigma = match &const_sigma {
                        Some(m) => m,
                        None => {
                            model.sigma(x, &mut s.sigma);
                            &s.sigma
                        }
                    };
                    mat_vec(sigma, &s.xi1, &mut s.nx);
                    for k in 0..d {
                        out[k] = x[k] + s.b[k] * h + s.nx[k];
                    }
                    if out.iter().all(|v| v.is_finite()) {
                        Ok(())
                    } else {
                        Err(Error::Explosion { particle: i, step: step + 1 })
                    }
                },
            )?;
        std::mem::swap(&mut self.states, &mut self.next);
        self.step += 1;
        self.time = self.step as f64 * h;
        Ok(())
    }

    /// Runs `plan.steps` steps, calling `record` at step 0, every `stride`
    /// steps and at the end.
    pub fn run<F: FnMut(&Self) -> Result<()>>(&mut self, plan: &StepPlan, mut record: F) -> Result<()> {
        record(self)?;
        for k in 1..=plan.steps {
            self.step(plan)?;
            if k % plan.stride == 0 || k == plan.steps {
                record(self)?;
            }
        }
        Ok(())
    }

    pub fn simulate(&mut self, plan: &StepPlan) -> Result<Trajectory> {
        let mut snapshots = Vec::new();
        self.run(plan, |e| {
            snapshots.push(e.snapshot());
            Ok(())
        })?;
        Ok(Trajectory { n: self.n, dim: self.dim(), systems: 1, h: plan.h, snapshots })
    }
}
