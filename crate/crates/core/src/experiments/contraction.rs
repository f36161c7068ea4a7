use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{all_passed, initial_v_mean, mean_stderr, opt, split_half_floor, Assertion, ExperimentConfig, PipelineChoice, RateFit};
use crate::constants::{build_pipeline1, build_pipeline2, MetricEvaluator, PipelineOptions};
use crate::error::Result;
use crate::experiments::fit::{fit_rate_floors, fit_rate_window};
use crate::rng::mix_seed;
use crate::simulate::{CoupledEnsemble, LawProxy, ParticleEnsemble};
use crate::transport::{exact_assignment, w1, GroundCost};

/// Constants the run is compared against.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionConstants {
    pub pipeline: PipelineChoice,
    /// Pipeline 1 rate and prefactor.
    pub gamma: Option<f64>,
    pub big_c: Option<f64>,
    /// Concavity constant of the profile in use.
    pub c: f64,
    /// Pipeline 2 weight in `ρ₁` and the `L1 < L1*` check.
    pub epsilon: Option<f64>,
    pub l1_below_star: Option<bool>,
}

/// Replicate-averaged values at one recorded time.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionRecord {
    pub t: f64,
    pub w1: f64,
    pub w1_stderr: f64,
    /// Split-half estimate of the empirical `W1` between two samples of one law.
    pub noise_floor: f64,
    pub bound: Option<f64>,
    pub w_rho: Option<f64>,
    pub w_rho_stderr: Option<f64>,
    pub w_rho1: Option<f64>,
    pub w_rho1_stderr: Option<f64>,
    pub w_rho1_bound: Option<f64>,
    /// Mean of `|X_i − Y_i|` over coupled pairs.
    pub pair_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub config: ExperimentConfig,
    pub constants: ContractionConstants,
    pub bound_applicable: bool,
    pub records: Vec<ContractionRecord>,
    /// Fit of `Ŵ1` on `t ≥ 1` above `3·max(noise floor, stderr)`.
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    /// Fit of the mean pair distance on `t ≥ 1`.
    pub pair_fit: Option<RateFit>,
    pub max_rc_sc_defect: f64,
    pub max_reflection_defect: f64,
    pub assertions: Vec<Assertion>,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.assertions)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,w1,w1_stderr,noise_floor,bound,w_rho,w_rho_stderr,w_rho1,w_rho1_stderr,w_rho1_bound,pair_distance")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.w1,
                r.w1_stderr,
                r.noise_floor,
                opt(r.bound),
                opt(r.w_rho),
                opt(r.w_rho_stderr),
                opt(r.w_rho1),
                opt(r.w_rho1_stderr),
                opt(r.w_rho1_bound),
                r.pair_distance
            )?;
        }
        Ok(())
    }
}

struct Sample {
    t: f64,
    w1: f64,
    w1_se: f64,
    floor: f64,
    pair: f64,
    rho: Option<f64>,
    rho1: Option<f64>,
}

struct Replicate {
    samples: Vec<Sample>,
    rc_sc: f64,
    reflection: f64,
}

fn first_k(states: &[f64], d: usize, k: usize) -> crate::transport::EmpiricalMeasure {
    let k = k.min(states.len() / d);
    crate::transport::EmpiricalMeasure::uniform(states[..k * d].to_vec(), d).expect("finite states")
}

/// Simulates `replicates` coupled pairs `(X, Y)` from `(initial_x, initial_y)`
/// and compares `Ŵ1(μ̂_t, ν̂_t)` with the contraction bound.
pub fn run_contraction(cfg: &ExperimentConfig) -> Result<ContractionReport> {
    cfg.validate()?;
    let built = cfg.model.build()?;
    let model = built.model;
    let a = built.assumptions;
    let d = model.dim();
    let opts = PipelineOptions::default();

    let (constants, rho, rho1) = match cfg.pipeline {
        PipelineChoice::Pipeline1 => {
            let p = build_pipeline1(&model, &a, &opts)?;
            let c = ContractionConstants {
                pipeline: cfg.pipeline,
                gamma: Some(p.gamma),
                big_c: Some(p.big_c),
                c: p.c,
                epsilon: None,
                l1_below_star: None,
            };
            (c, p.metric(), None)
        }
        PipelineChoice::Pipeline2 => {
            let cap = initial_v_mean(&cfg.initial_x, d)?.max(initial_v_mean(&cfg.initial_y, d)?);
            let p = build_pipeline2(&model, &a, &opts, cap)?;
            let c = ContractionConstants {
                pipeline: cfg.pipeline,
                gamma: None,
                big_c: None,
                c: p.c,
                epsilon: Some(p.epsilon),
                l1_below_star: Some(p.l1_below_star),
            };
            (c, p.profile_metric(), Some(p.metric()))
        }
    };
    let bound_applicable = match cfg.pipeline {
        PipelineChoice::Pipeline1 => constants.gamma.is_some_and(|g| g > 0.0),
        PipelineChoice::Pipeline2 => constants.l1_below_star == Some(true) && constants.c > 0.0,
    };

    let reps: Vec<Replicate> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, &model, r as u64, &rho, rho1.as_ref()))
        .collect::<Result<_>>()?;

    let records = aggregate(&reps, &constants, cfg, bound_applicable);
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let w: Vec<f64> = records.iter().map(|r| r.w1).collect();
    let floors: Vec<f64> = records.iter().map(|r| 3.0 * r.noise_floor.max(r.w1_stderr)).collect();
    let (fit, fit_error) = match fit_rate_floors(&t, &w, 1.0, &floors) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pairs: Vec<f64> = records.iter().map(|r| r.pair_distance).collect();
    let pair_fit = fit_rate_window(&t, &pairs, 1.0, 0.0).ok();

    let mut assertions = Vec::new();
    match cfg.pipeline {
        PipelineChoice::Pipeline1 => {
            let gamma = constants.gamma.unwrap_or(f64::NAN);
            if bound_applicable {
                let worst = records
                    .iter()
                    .map(|r| r.w1 - r.bound.unwrap_or(f64::INFINITY) - 3.0 * r.w1_stderr)
                    .fold(f64::NEG_INFINITY, f64::max);
                assertions.push(Assertion::new(
                    "w1_bound_dominates",
                    worst <= 0.0,
                    format!("max over t of Ŵ1 − C e^(−γt) Ŵ1(0) − 3·stderr = {worst:.3e}"),
                ));
                match &fit {
                    Some(f) => assertions.push(Assertion::new(
                        "fitted_rate_at_least_0.9_gamma",
                        -f.rate >= 0.9 * gamma,
                        format!("fitted decay {:.4} vs γ = {gamma:.4}", -f.rate),
                    )),
                    None => assertions.push(Assertion::new(
                        "fitted_rate_at_least_0.9_gamma",
                        false,
                        fit_error.clone().unwrap_or_default(),
                    )),
                }
            } else {
                assertions.push(Assertion::skipped("w1_bound_dominates", format!("γ = {gamma:.4e} ≤ 0, curves recorded only")));
            }
        }
        PipelineChoice::Pipeline2 => {
            if bound_applicable {
                let worst = records
                    .iter()
                    .filter_map(|r| Some(r.w_rho1? - r.w_rho1_bound? - 3.0 * r.w_rho1_stderr?))
                    .fold(f64::NEG_INFINITY, f64::max);
                assertions.push(Assertion::new(
                    "w_rho1_bound_dominates",
                    worst <= 0.0,
                    format!("max over t of Ŵρ₁ − e^(−ct) Ŵρ₁(0) − 3·stderr = {worst:.3e}"),
                ));
            } else {
                assertions.push(Assertion::skipped("w_rho1_bound_dominates", "L1 ≥ L1* or c ≤ 0, curves recorded only".into()));
            }
        }
    }
    let rc_sc = reps.iter().map(|r| r.rc_sc).fold(0.0, f64::max);
    let refl = reps.iter().map(|r| r.reflection).fold(0.0, f64::max);
    assertions.push(Assertion::new("rc_sc_unit", rc_sc <= 1e-12, format!("max |rc² + sc² − 1| = {rc_sc:.2e}")));
    assertions.push(Assertion::new(
        "reflection_orthogonal",
        refl <= 1e-12,
        format!("max reflection defect = {refl:.2e}"),
    ));

    Ok(ContractionReport {
        config: cfg.clone(),
        constants,
        bound_applicable,
        records,
        fit,
        fit_error,
        pair_fit,
        max_rc_sc_defect: rc_sc,
        max_reflection_defect: refl,
        assertions,
    })
}

fn run_replicate(
    cfg: &ExperimentConfig,
    model: &crate::model::CoefficientModel,
    rep: u64,
    rho: &MetricEvaluator,
    rho1: Option<&MetricEvaluator>,
) -> Result<Replicate> {
    let d = model.dim();
    let seed = mix_seed(cfg.seed, rep);
    let mut plan = cfg.plan()?;
    plan.seed = seed;
    let x = ParticleEnsemble::from_law(model.clone(), &cfg.initial_x, cfg.n, seed, 1)?;
    let y = ParticleEnsemble::from_law(model.clone(), &cfg.initial_y, cfg.n, seed, 2)?;
    let mut pair = CoupledEnsemble::new(x, y, cfg.delta, cfg.mode, 3)?;
    let mut samples = Vec::new();
    let mut k = 0usize;
    pair.run(&plan, &LawProxy::EmpiricalSelf, |c| {
        let (mx, my) = (c.x().empirical(), c.y().empirical());
        let w = w1(&mx, &my)?;
        let (rho_v, rho1_v) = if k.is_multiple_of(cfg.rho_every) {
            let xs = first_k(c.x().states(), d, cfg.rho_sample);
            let ys = first_k(c.y().states(), d, cfg.rho_sample);
            let r = exact_assignment(&xs, &ys, GroundCost::Metric(rho))?.value;
            let r1 = match rho1 {
                Some(m) => Some(exact_assignment(&xs, &ys, GroundCost::Metric(m))?.value),
                None => None,
            };
            (Some(r), r1)
        } else {
            (None, None)
        };
        samples.push(Sample {
            t: c.time(),
            w1: w.value,
            w1_se: w.stderr,
            floor: split_half_floor(&mx)?,
            pair: c.mean_pair_distance(),
            rho: rho_v,
            rho1: rho1_v,
        });
        k += 1;
        Ok(())
    })?;
    let diag = pair.diagnostics();
    Ok(Replicate { samples, rc_sc: diag.max_rc_sc_defect, reflection: diag.max_reflection_defect })
}

fn aggregate(reps: &[Replicate], k: &ContractionConstants, cfg: &ExperimentConfig, applicable: bool) -> Vec<ContractionRecord> {
    let n_rep = reps.len() as f64;
    let len = reps[0].samples.len();
    let col = |i: usize, f: &dyn Fn(&Sample) -> Option<f64>| -> Option<Vec<f64>> {
        reps.iter().map(|r| f(&r.samples[i])).collect()
    };
    let mut out: Vec<ContractionRecord> = Vec::with_capacity(len);
    for i in 0..len {
        let t = reps[0].samples[i].t;
        let w1s = col(i, &|s| Some(s.w1)).unwrap();
        let (w1_mean, w1_se_rep) = mean_stderr(&w1s);
        // Transport estimation error of the replicate mean.
        let transport_var: f64 = reps.iter().map(|r| r.samples[i].w1_se.powi(2)).sum::<f64>() / (n_rep * n_rep);
        let w1_stderr = (w1_se_rep * w1_se_rep + transport_var).sqrt();
        let floors = col(i, &|s| Some(s.floor)).unwrap();
        let floor = floors.iter().sum::<f64>() / n_rep;
        let pair = col(i, &|s| Some(s.pair)).unwrap().iter().sum::<f64>() / n_rep;
        let rho = col(i, &|s| s.rho).map(|v| mean_stderr(&v));
        let rho1 = col(i, &|s| s.rho1).map(|v| mean_stderr(&v));
        out.push(ContractionRecord {
            t,
            w1: w1_mean,
            w1_stderr,
            noise_floor: floor,
            bound: None,
            w_rho: rho.map(|v| v.0),
            w_rho_stderr: rho.map(|v| v.1),
            w_rho1: rho1.map(|v| v.0),
            w_rho1_stderr: rho1.map(|v| v.1),
            w_rho1_bound: None,
            pair_distance: pair,
        });
    }
    if applicable {
        let w0 = out[0].w1;
        let r0 = out[0].w_rho1;
        for r in &mut out {
            match cfg.pipeline {
                PipelineChoice::Pipeline1 => {
                    let (g, c) = (k.gamma.unwrap(), k.big_c.unwrap());
                    r.bound = Some(c * (-g * r.t).exp() * w0);
                }
                PipelineChoice::Pipeline2 => {
                    if r.w_rho1.is_some() {
                        r.w_rho1_bound = r0.map(|v| (-k.c * r.t).exp() * v);
                    }
                }
            }
        }
    }
    out
}
