use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{all_passed, mean_stderr, ols, split_half_floor, Assertion, ExperimentConfig};
use crate::constants::{build_pipeline1, MetricEvaluator, PipelineOptions};
use crate::error::{Error, Result};
use crate::model::CoefficientModel;
use crate::rng::mix_seed;
use crate::simulate::{ParticleEnsemble, StepPlan};
use crate::transport::{w1, w_cost_with, EmpiricalMeasure, GroundCost, TransportOptions};

/// `n(d)` without its constant: `n^{−1/2}` below dimension 4,
/// `n^{−1/2} ln n` at 4 and `n^{−2/d}` above.
pub fn chaos_rate(n: usize, d: usize) -> f64 {
    let n = n as f64;
    match d {
        0..=3 => n.powf(-0.5),
        4 => n.powf(-0.5) * n.ln(),
        _ => n.powf(-2.0 / d as f64),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    /// `Ŵ1(μ_T^n, μ_T^ref)` averaged over replicates.
    pub w1: f64,
    pub w1_stderr: f64,
    /// `Ŵ_ρ(μ_T^n, μ_T^ref)` against the first `n` reference particles.
    pub w_rho: f64,
    pub w_rho_stderr: f64,
    /// `Ŵ_ρ(μ_0^n, μ_0^ref)` on the same index set.
    pub w_rho_initial: f64,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChaosReport {
    pub config: ExperimentConfig,
    pub gamma: f64,
    pub horizon: f64,
    pub n_ref: usize,
    /// Split-half `W1` noise floor of the reference cloud at `T`.
    pub reference_floor: f64,
    pub rows: Vec<ChaosRow>,
    /// Least-squares slope of `ln Ŵ1` on `ln n`.
    pub slope: f64,
    pub slope_r_squared: f64,
    /// Constant `K` in `e^{−γT}Ŵ_ρ(μ₀ⁿ, μ₀) + K·(n(d)/C)^{1/2}/γ`, fitted at the
    /// smallest `n` and then held fixed.
    pub fit_c: Option<f64>,
    pub warnings: Vec<String>,
    pub assertions: Vec<Assertion>,
}

impl ChaosReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.assertions)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,w1,w1_stderr,w_rho,w_rho_stderr,w_rho_initial,bound")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.n,
                r.w1,
                r.w1_stderr,
                r.w_rho,
                r.w_rho_stderr,
                r.w_rho_initial,
                super::opt(r.bound)
            )?;
        }
        Ok(())
    }
}

fn first(m: &EmpiricalMeasure, k: usize) -> EmpiricalMeasure {
    let idx: Vec<usize> = (0..k.min(m.len())).collect();
    m.select(&idx)
}

struct Cell {
    w1: f64,
    w1_se: f64,
    rho: f64,
    rho_se: f64,
    rho0: f64,
}

/// Runs `replicates` systems of each size in `n_grid` to time `T` and
/// compares them with one reference system of `ref_factor · max(n_grid)`
/// particles standing in for the limiting law.
pub fn run_chaos(cfg: &ExperimentConfig) -> Result<ChaosReport> {
    cfg.validate()?;
    if cfg.n_grid.is_empty() {
        return Err(Error::InvalidInput("n_grid is empty".into()));
    }
    let built = cfg.model.build()?;
    let model = built.model;
    let d = model.dim();
    let p1 = build_pipeline1(&model, &built.assumptions, &PipelineOptions::default())?;
    let rho = p1.metric();
    let gamma = p1.gamma;
    let plan = cfg.plan()?;
    let n_max = *cfg.n_grid.iter().max().unwrap();
    let n_ref = cfg.ref_factor.max(1) * n_max;

    let mut warnings = Vec::new();
    // Subsampled estimates are biased upward, so the grid is solved exactly
    // up to `exact_cap`.
    let topts = TransportOptions { cap: cfg.exact_cap.max(TransportOptions::default().cap), ..Default::default() };
    if n_max > topts.cap {
        warnings.push(format!("n > {}: Ŵ_ρ uses the subsampled transport estimate", topts.cap));
    }
    if d > 1 {
        warnings.push("d > 1: Ŵ1 compares against the first n reference particles".into());
    }

    let ref_seed = mix_seed(cfg.seed, u64::MAX);
    let mut reference = ParticleEnsemble::from_law(model.clone(), &cfg.initial_x, n_ref, ref_seed, 0)?;
    let ref0 = reference.empirical();
    let ref_plan = StepPlan { seed: ref_seed, ..plan };
    for _ in 0..plan.steps {
        reference.step(&ref_plan)?;
    }
    let ref_t = reference.empirical();
    let reference_floor = split_half_floor(&ref_t)?;

    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let cells: Vec<Cell> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| replicate(&model, cfg, &plan, n, r as u64, (&ref0, &ref_t), &rho, &topts))
            .collect::<Result<_>>()?;
        let pick = |f: fn(&Cell) -> f64| cells.iter().map(f).collect::<Vec<_>>();
        let (w1m, w1s) = mean_stderr(&pick(|c| c.w1));
        let (rm, rs) = mean_stderr(&pick(|c| c.rho));
        let k = cells.len() as f64;
        let w1_tr = pick(|c| c.w1_se * c.w1_se).iter().sum::<f64>() / (k * k);
        let rho_tr = pick(|c| c.rho_se * c.rho_se).iter().sum::<f64>() / (k * k);
        rows.push(ChaosRow {
            n,
            w1: w1m,
            w1_stderr: (w1s * w1s + w1_tr).sqrt(),
            w_rho: rm,
            w_rho_stderr: (rs * rs + rho_tr).sqrt(),
            w_rho_initial: mean_stderr(&pick(|c| c.rho0)).0,
            bound: None,
        });
    }

    let mut assertions = Vec::new();
    let (slope, _, r2) = if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.w1.ln()).collect();
        ols(&x, &y)?
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    assertions.push(Assertion::new("w1_decreases_with_n", slope < 0.0, format!("log-log slope {slope:.3}")));

    let t = plan.horizon();
    let fit_c = if gamma > 0.0 {
        let decay = (-gamma * t).exp();
        let head = &rows[0];
        let k = ((head.w_rho - decay * head.w_rho_initial) * gamma / chaos_rate(head.n, d).sqrt()).max(0.0);
        let mut worst = f64::NEG_INFINITY;
        for r in &mut rows {
            let b = decay * r.w_rho_initial + k * chaos_rate(r.n, d).sqrt() / gamma;
            r.bound = Some(b);
            worst = worst.max(r.w_rho - b - 3.0 * r.w_rho_stderr);
        }
        assertions.push(Assertion::new(
            "chaos_bound_dominates",
            worst <= 0.0,
            format!("max over n of Ŵ_ρ − bound − 3·stderr = {worst:.3e} with K = {k:.4e}"),
        ));
        Some(k)
    } else {
        assertions.push(Assertion::skipped("chaos_bound_dominates", format!("γ = {gamma:.4e} ≤ 0")));
        None
    };

    Ok(ChaosReport {
        config: cfg.clone(),
        gamma,
        horizon: t,
        n_ref,
        reference_floor,
        rows,
        slope,
        slope_r_squared: r2,
        fit_c,
        warnings,
        assertions,
    })
}

#[allow(clippy::too_many_arguments)]
fn replicate(
    model: &CoefficientModel,
    cfg: &ExperimentConfig,
    plan: &StepPlan,
    n: usize,
    rep: u64,
    (ref0, ref_t): (&EmpiricalMeasure, &EmpiricalMeasure),
    rho: &MetricEvaluator,
    topts: &TransportOptions,
) -> Result<Cell> {
    let seed = mix_seed(mix_seed(cfg.seed, n as u64), rep);
    let mut e = ParticleEnsemble::from_law(model.clone(), &cfg.initial_x, n, seed, 1)?;
    let start = e.empirical();
    let plan = StepPlan { seed, ..*plan };
    for _ in 0..plan.steps {
        e.step(&plan)?;
    }
    let end = e.empirical();
    let w = if e.dim() == 1 { w1(&end, ref_t)? } else { w1(&end, &first(ref_t, n))? };
    let r = w_cost_with(&end, &first(ref_t, n), GroundCost::Metric(rho), topts)?;
    let r0 = w_cost_with(&start, &first(ref0, n), GroundCost::Metric(rho), topts)?;
    Ok(Cell { w1: w.value, w1_se: w.stderr, rho: r.value, rho_se: r.stderr, rho0: r0.value })
}
