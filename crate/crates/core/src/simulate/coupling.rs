use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{ParticleEnsemble, Scratch, Snapshot, StepPlan, Trajectory, MIN_CHUNK};
use super::{reflection_axis, transition_rc_sc};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm};
use crate::model::{LawSummary, LawView};
use crate::rng::NoiseSource;
use crate::transport::EmpiricalMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Reflection for `|X − Y| ≥ δ`, synchronous below `δ/2`, blended between.
    Mixed,
    Synchronous,
    Reflection,
    /// Independent noises for the two systems.
    Independent,
}

impl FromStr for CouplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(Self::Mixed),
            "synchronous" => Ok(Self::Synchronous),
            "reflection" => Ok(Self::Reflection),
            "independent" => Ok(Self::Independent),
            _ => Err(Error::InvalidInput(format!("unknown coupling mode '{s}'"))),
        }
    }
}

/// Which measure each system's drift sees.
#[derive(Clone, Debug)]
pub enum LawProxy {
    /// Each system's own empirical law.
    EmpiricalSelf,
    /// Fixed user-supplied laws for `X` and `Y`.
    Frozen { x: EmpiricalMeasure, y: EmpiricalMeasure },
}

/// Per-pair values at the start of the most recent step.
#[derive(Clone, Debug, Default)]
pub struct PairDiagnostics {
    pub r: Vec<f64>,
    pub rc: Vec<f64>,
    pub sc: Vec<f64>,
    /// Largest `|rc² + sc² − 1|` seen so far.
    pub max_rc_sc_defect: f64,
    /// Largest defect of `H` (orthogonality or `Hu = −u`) seen so far.
    pub max_reflection_defect: f64,
}

/// Two particle systems driven by coupled noise.
#[derive(Clone, Debug)]
pub struct CoupledEnsemble {
    x: ParticleEnsemble,
    y: ParticleEnsemble,
    delta: f64,
    mode: CouplingMode,
    tag: u8,
    diag: PairDiagnostics,
    defect: Vec<f64>,
}

const SLOT_SHARED: u8 = 1;
const SLOT_REFLECTED: u8 = 2;
const SLOT_INDEPENDENT: u8 = 3;

impl CoupledEnsemble {
    pub fn new(x: ParticleEnsemble, y: ParticleEnsemble, delta: f64, mode: CouplingMode, tag: u8) -> Result<Self> {
        if x.len() != y.len() || x.dim() != y.dim() {
            return Err(Error::SizeMismatch(format!(
                "coupled systems need equal shapes: {}×{} vs {}×{}",
                x.len(),
                x.dim(),
                y.len(),
                y.dim()
            )));
        }
        if x.time() != y.time() {
            return Err(Error::InvalidInput("coupled systems must start at the same time".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("δ must lie in (0, 1), got {delta}")));
        }
        let n = x.len();
        let diag = PairDiagnostics { r: vec![0.0; n], rc: vec![0.0; n], sc: vec![0.0; n], ..Default::default() };
        Ok(Self { x, y, delta, mode, tag, diag, defect: vec![0.0; n] })
    }

    pub fn x(&self) -> &ParticleEnsemble {
        &self.x
    }

    pub fn y(&self) -> &ParticleEnsemble {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.x.time()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn diagnostics(&self) -> &PairDiagnostics {
        &self.diag
    }

    /// Mean of `|X_i − Y_i|` over pairs.
    pub fn mean_pair_distance(&self) -> f64 {
        let d = self.x.dim();
        let xs = self.x.states();
        let ys = self.y.states();
        let total: f64 = (0..self.len())
            .map(|i| crate::linalg::dist(&xs[i * d..(i + 1) * d], &ys[i * d..(i + 1) * d]))
            .sum();
        total / self.len() as f64
    }

    pub fn snapshot(&self) -> Snapshot {
        let mut states = self.x.states().to_vec();
        states.extend_from_slice(self.y.states());
        Snapshot { step: self.x.step, time: self.x.time, states }
    }

    /// One Euler–Maruyama step of the coupled pair; `rc`, `sc` and `H` are
    /// frozen at the start of the step.
    pub fn step(&mut self, plan: &StepPlan, proxy: &LawProxy) -> Result<()> {
        let d = self.x.dim();
        let h = plan.h;
        let sqrt_h = h.sqrt();
        let noise = NoiseSource::new(plan.seed);
        let (tag, step, delta, mode) = (self.tag, self.x.step, self.delta, self.mode);
        let model = self.x.model().clone();
        let model_y = self.y.model().clone();
        let zero = vec![0.0; d];
        let const_x = model.diffusion_is_constant().then(|| model.sigma_matrix(&zero));
        let const_y = match model_y.diffusion_is_constant() {
            true => {
                let s = model_y.sigma_matrix(&zero);
                let mut inv = s.clone();
                model_y.sigma_inverse(&zero, &s, &mut inv)?;
                Some((s, inv))
            }
            false => None,
        };

        let (sum_x, sum_y, pts_x, pts_y): (LawSummary, LawSummary, &[f64], &[f64]) = match proxy {
            LawProxy::EmpiricalSelf => (
                model.summarize(&self.x.states),
                model_y.summarize(&self.y.states),
                &self.x.states,
                &self.y.states,
            ),
            LawProxy::Frozen { x, y } => {
                if x.dim() != d || y.dim() != d {
                    return Err(Error::SizeMismatch("frozen law dimension".into()));
                }
                (model.summarize(x.points()), model_y.summarize(y.points()), x.points(), y.points())
            }
        };
        let law_x: LawView<'_> = sum_x.view(pts_x, d);
        let law_y: LawView<'_> = sum_y.view(pts_y, d);
        let xs = &self.x.states;
        let ys = &self.y.states;

        self.x
            .next
            .par_chunks_mut(d)
            .zip(self.y.next.par_chunks_mut(d))
            .zip(self.diag.r.par_iter_mut())
            .zip(self.diag.rc.par_iter_mut())
            .zip(self.diag.sc.par_iter_mut())
            .zip(self.defect.par_iter_mut())
            .enumerate()
            .with_min_len(MIN_CHUNK)
            .try_for_each_init(
                || Scratch::new(d),
                |s, (i, (((((out_x, out_y), r_out), rc_out), sc_out), defect))| {
                    let x = &xs[i * d..(i + 1) * d];
                    let y = &ys[i * d..(i + 1) * d];
                    for k in 0..d {
                        s.z[k] = x[k] - y[k];
                    }
                    let r = norm(&s.z);
                    let (rc, sc) = match mode {
                        CouplingMode::Mixed => transition_rc_sc(r, delta),
                        CouplingMode::Reflection => (1.0, 0.0),
                        CouplingMode::Synchronous | CouplingMode::Independent => (0.0, 1.0),
                    };
                    *r_out = r;
                    *rc_out = rc;
                    *sc_out = sc;
                    *defect = 0.0;

                    model.drift(x, &law_x, &mut s.b);
                    model_y.drift(y, &law_y, &mut s.b2);
                    noise.fill_normals(tag, SLOT_SHARED, i, step, sqrt_h, &mut s.xi1);

                    let sx = match &const_x {
                        Some(m) => m,
                        None => {
                            model.sigma(x, &mut s.sigma);
                            &s.sigma
                        }
                    };
                    let (sy, sy_inv) = match &const_y {
                        Some((m, inv)) => (m, Some(inv)),
                        None => {
                            model_y.sigma(y, &mut s.sigma2);
                            (&s.sigma2, None)
                        }
                    };

                    if mode == CouplingMode::Independent {
                        noise.fill_normals(tag, SLOT_INDEPENDENT, i, step, sqrt_h, &mut s.xi2);
                        mat_vec(sx, &s.xi1, &mut s.nx);
                        mat_vec(sy, &s.xi2, &mut s.ny);
                    } else {
                        noise.fill_normals(tag, SLOT_REFLECTED, i, step, sqrt_h, &mut s.xi2);
                        for k in 0..d {
                            s.tmp[k] = sc * s.xi1[k] + rc * s.xi2[k];
                        }
                        mat_vec(sx, &s.tmp, &mut s.nx);
                        if rc > 0.0 {
                            let inv = match sy_inv {
                                Some(inv) => inv,
                                None => {
                                    model_y.sigma_inverse(y, sy, &mut s.inv)?;
                                    &s.inv
                                }
                            };
                            reflection_axis(inv, &s.z, &mut s.u);
                            let uu = dot(&s.u, &s.u);
                            let umax = s.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                            // HHᵀ − I = 4(|u|² − 1)uuᵀ and Hu + u = 2(1 − |u|²)u.
                            *defect = 4.0 * (uu - 1.0).abs() * umax * umax.max(1.0);
                            let proj = dot(&s.u, &s.xi2);
                            for k in 0..d {
                                s.tmp[k] = sc * s.xi1[k] + rc * (s.xi2[k] - 2.0 * proj * s.u[k]);
                            }
                        } else {
                            for k in 0..d {
                                s.tmp[k] = sc * s.xi1[k];
                            }
                        }
                        mat_vec(sy, &s.tmp, &mut s.ny);
                    }
                    for k in 0..d {
                        out_x[k] = x[k] + s.b[k] * h + s.nx[k];
                        out_y[k] = y[k] + s.b2[k] * h + s.ny[k];
                    }
                    if !out_x.iter().chain(out_y.iter()).all(|v| v.is_finite()) {
                        return Err(Error::Explosion { particle: i, step: step + 1 });
                    }
                    Ok(())
                },
            )?;

        for i in 0..self.len() {
            let (rc, sc) = (self.diag.rc[i], self.diag.sc[i]);
            self.diag.max_rc_sc_defect = self.diag.max_rc_sc_defect.max((rc * rc + sc * sc - 1.0).abs());
            self.diag.max_reflection_defect = self.diag.max_reflection_defect.max(self.defect[i]);
        }
        for e in [&mut self.x, &mut self.y] {
            std::mem::swap(&mut e.states, &mut e.next);
            e.step += 1;
            e.time = e.step as f64 * h;
        }
        Ok(())
    }

    /// Runs `plan.steps` steps, recording at step 0, every stride and the end.
    pub fn run<F: FnMut(&Self) -> Result<()>>(&mut self, plan: &StepPlan, proxy: &LawProxy, mut record: F) -> Result<()> {
        record(self)?;
        for k in 1..=plan.steps {
            self.step(plan, proxy)?;
            if k % plan.stride == 0 || k == plan.steps {
                record(self)?;
            }
        }
        Ok(())
    }

    pub fn simulate(&mut self, plan: &StepPlan, proxy: &LawProxy) -> Result<Trajectory> {
        let mut snapshots = Vec::new();
        self.run(plan, proxy, |c| {
            snapshots.push(c.snapshot());
            Ok(())
        })?;
        Ok(Trajectory { n: self.len(), dim: self.x.dim(), systems: 2, h: plan.h, snapshots })
    }
}
