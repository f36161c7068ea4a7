use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{mat_t_vec, norm, spectral_norm};
use crate::model::CoefficientModel;
use crate::rng::task_rng;

/// How to obtain the constant `A`.
#[derive(Clone, Debug)]
pub enum AStrategy {
    /// Exact zero for constant `σ` or `d = 1`, sampling otherwise.
    Auto,
    /// User-supplied value.
    Override(f64),
    Sampled(ASampling),
}

/// Sampled supremum: `x ~ N(0, state_std² I)`, `y = x + r·θ` with `θ` uniform
/// on the sphere and `r` cycling through log-spaced radii in `[1e-4, r_max]`.
#[derive(Clone, Debug)]
pub struct ASampling {
    pub pairs: usize,
    pub r_max: f64,
    pub state_std: f64,
    pub seed: u64,
    pub polish: bool,
}

impl Default for ASampling {
    fn default() -> Self {
        Self { pairs: 1_000_000, r_max: 50.0, state_std: 5.0, seed: 0, polish: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AMethod {
    Override,
    ExactZero,
    Sampled,
}

#[derive(Clone, Debug, Serialize)]
pub struct AEstimate {
    pub value: f64,
    pub method: AMethod,
    /// Pair attaining the reported value, when sampled.
    pub argmax: Option<(Vec<f64>, Vec<f64>)>,
}

const RADIUS_LEVELS: usize = 64;
const CHUNK: usize = 1 << 14;

struct Scratch {
    sx: DMatrix<f64>,
    sy: DMatrix<f64>,
    z: Vec<f64>,
    tz: Vec<f64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Self { sx: DMatrix::zeros(d, d), sy: DMatrix::zeros(d, d), z: vec![0.0; d], tz: vec![0.0; d] }
    }
}

fn ratio_with(model: &CoefficientModel, x: &[f64], y: &[f64], s: &mut Scratch) -> Result<f64> {
    let d = model.dim();
    for k in 0..d {
        s.z[k] = x[k] - y[k];
    }
    let r = norm(&s.z);
    if r == 0.0 {
        return Ok(0.0);
    }
    model.sigma(x, &mut s.sx);
    model.sigma(y, &mut s.sy);
    if s.sx.iter().chain(s.sy.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("diffusion at {x:?} or {y:?}")));
    }
    s.sx -= &s.sy;
    let delta = &s.sx;
    let op = spectral_norm(delta);
    mat_t_vec(delta, &s.z, &mut s.tz);
    let tz2: f64 = s.tz.iter().map(|v| v * v).sum();
    Ok((d as f64 * op * op * r * r - tz2) / (r * r * r))
}

/// `(d‖Δ‖²|z|² − |Δᵀz|²)/|z|³` with `Δ = σ(x) − σ(y)`, `z = x − y`.
pub fn a_ratio(model: &CoefficientModel, x: &[f64], y: &[f64]) -> Result<f64> {
    ratio_with(model, x, y, &mut Scratch::new(model.dim()))
}

struct NegRatio<'a> {
    model: &'a CoefficientModel,
}

impl CostFunction for NegRatio<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let d = self.model.dim();
        let v = a_ratio(self.model, &p[..d], &p[d..]).map_err(|e| argmin::core::Error::msg(e.to_string()))?;
        Ok(-v)
    }
}

fn polish(model: &CoefficientModel, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    let d = model.dim();
    let mut best: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut best_val = a_ratio(model, x, y)?;
    let mut step = 0.1 * (norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>()) + 0.1);
    for _ in 0..3 {
        let mut simplex = vec![best.clone()];
        for k in 0..2 * d {
            let mut v = best.clone();
            v[k] += step;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-15)
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let res = Executor::new(NegRatio { model }, solver)
            .configure(|s| s.max_iters(4000))
            .run()
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let state = res.state();
        if let Some(p) = state.best_param.as_ref() {
            let v = -state.best_cost;
            if v.is_finite() && v > best_val {
                best_val = v;
                best = p.clone();
            }
        }
        step *= 0.1;
    }
    Ok((best_val, best))
}

/// Estimates `A = sup_{x≠y} (d‖Δ‖²|z|² − |Δᵀz|²)/|z|³`, clamped at 0.
pub fn estimate_a(model: &CoefficientModel, strategy: &AStrategy) -> Result<AEstimate> {
    let sampling = match strategy {
        AStrategy::Override(v) => {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidInput(format!("A override must be finite and ≥ 0, got {v}")));
            }
            return Ok(AEstimate { value: *v, method: AMethod::Override, argmax: None });
        }
        AStrategy::Auto if model.dim() == 1 || model.diffusion_is_constant() => {
            return Ok(AEstimate { value: 0.0, method: AMethod::ExactZero, argmax: None });
        }
        AStrategy::Auto => ASampling::default(),
        AStrategy::Sampled(s) => s.clone(),
    };
    let d = model.dim();
    let normal = Normal::new(0.0, sampling.state_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let log_lo = 1e-4f64.ln();
    let log_hi = sampling.r_max.max(2e-4).ln();
    let n_chunks = sampling.pairs.div_ceil(CHUNK);

    let per_chunk: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<_> {
            let mut rng = task_rng(sampling.seed, c as u64);
            let mut s = Scratch::new(d);
            let mut best = (f64::NEG_INFINITY, vec![0.0; d], vec![0.0; d]);
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut dir = vec![0.0; d];
            let end = ((c + 1) * CHUNK).min(sampling.pairs);
            for k in c * CHUNK..end {
                for v in x.iter_mut() {
                    *v = normal.sample(&mut rng);
                }
                loop {
                    for v in dir.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    if norm(&dir) > 1e-12 {
                        break;
                    }
                }
                let dn = norm(&dir);
                let level = (k % RADIUS_LEVELS) as f64 / (RADIUS_LEVELS - 1) as f64;
                let r = (log_lo + (log_hi - log_lo) * level).exp() * (1.0 + 0.01 * rng.random::<f64>());
                for i in 0..d {
                    y[i] = x[i] + r * dir[i] / dn;
                }
                let v = ratio_with(model, &x, &y, &mut s)?;
                if v > best.0 {
                    best = (v, x.clone(), y.clone());
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, vec![0.0; d], vec![0.0; d]);
    for cand in per_chunk {
        if cand.0 > best.0 {
            best = cand;
        }
    }
    if sampling.polish && best.0.is_finite() && best.0 > 0.0 {
        let (v, p) = polish(model, &best.1, &best.2)?;
        if v > best.0 {
            best = (v, p[..d].to_vec(), p[d..].to_vec());
        }
    }
    Ok(AEstimate { value: best.0.max(0.0), method: AMethod::Sampled, argmax: Some((best.1, best.2)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_model, MeasureFeatures};

    #[test]
    fn auto_short_circuits() {
        let b = builtin_model("mean_field_ou", &serde_json::json!({"dim": 3, "l1": 0.0})).unwrap();
        let e = estimate_a(&b.model, &AStrategy::Auto).unwrap();
        assert_eq!((e.value, e.method), (0.0, AMethod::ExactZero));
    }

    #[test]
    fn one_dimensional_sampled_sup_vanishes() {
        let model = CoefficientModel::new(
            1,
            |_x: &[f64], _l: &crate::model::LawView<'_>, o: &mut [f64]| o[0] = 0.0,
            |x: &[f64], s: &mut DMatrix<f64>| s[(0, 0)] = 1.0 + 0.5 * x[0].sin(),
            MeasureFeatures::NONE,
        )
        .unwrap();
        let s = ASampling { pairs: 20_000, ..Default::default() };
        let e = estimate_a(&model, &AStrategy::Sampled(s)).unwrap();
        assert!(e.value <= 1e-12, "{}", e.value);
    }
}
