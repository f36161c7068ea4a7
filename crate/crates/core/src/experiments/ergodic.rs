use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{all_passed, split_half_floor, Assertion, ExperimentConfig};
use crate::constants::LyapunovBound;
use crate::error::Result;
use crate::linalg::dot;
use crate::rng::mix_seed;
use crate::simulate::ParticleEnsemble;
use crate::transport::{w1, EmpiricalMeasure};

/// Pooled moments at one recorded time.
#[derive(Clone, Debug, Serialize)]
pub struct ErgodicRecord {
    pub t: f64,
    /// Euclidean norm of the pooled mean.
    pub mean_norm: f64,
    /// Pooled variance averaged over coordinates.
    pub variance: f64,
    /// Pooled `E[1 + |X|²]`.
    pub mean_v: f64,
    pub mean_v_stderr: f64,
    pub lyapunov_bound: Option<f64>,
}

/// `Ŵ1(μ̂_{T−s}, μ̂_T)` for one lag `s` on the first replicate.
#[derive(Clone, Debug, Serialize)]
pub struct CauchyPoint {
    pub lag: f64,
    pub w1: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErgodicReport {
    pub config: ExperimentConfig,
    pub records: Vec<ErgodicRecord>,
    pub terminal_mean: Vec<f64>,
    pub terminal_mean_stderr: Vec<f64>,
    pub terminal_variance: Vec<f64>,
    /// Per-coordinate stationary mean and variance.
    pub stationary_mean: Option<f64>,
    pub stationary_variance: Option<f64>,
    pub cauchy: Vec<CauchyPoint>,
    /// Split-half `W1` noise floor at `T` (first replicate).
    pub noise_floor: f64,
    /// `Ŵ1(μ̂_0, μ̂_T)` on the first replicate.
    pub w1_start_end: f64,
    pub assertions: Vec<Assertion>,
}

impl ErgodicReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.assertions)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mean_norm,variance,mean_v,mean_v_stderr,lyapunov_bound")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.t,
                r.mean_norm,
                r.variance,
                r.mean_v,
                r.mean_v_stderr,
                super::opt(r.lyapunov_bound)
            )?;
        }
        Ok(())
    }
}

/// Running sums over particles of one record.
#[derive(Clone)]
struct Moments {
    t: f64,
    count: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    v: f64,
    v_sq: f64,
}

impl Moments {
    fn of(e: &ParticleEnsemble) -> Self {
        let d = e.dim();
        let mut m = Self { t: e.time(), count: 0.0, sum: vec![0.0; d], sum_sq: vec![0.0; d], v: 0.0, v_sq: 0.0 };
        for i in 0..e.len() {
            let x = e.particle(i);
            for ((s, q), v) in m.sum.iter_mut().zip(&mut m.sum_sq).zip(x) {
                *s += v;
                *q += v * v;
            }
            let v = 1.0 + dot(x, x);
            m.v += v;
            m.v_sq += v * v;
        }
        m.count = e.len() as f64;
        m
    }

    fn merge(&mut self, o: &Self) {
        self.count += o.count;
        for k in 0..self.sum.len() {
            self.sum[k] += o.sum[k];
            self.sum_sq[k] += o.sum_sq[k];
        }
        self.v += o.v;
        self.v_sq += o.v_sq;
    }

    fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.count).collect()
    }

    fn variance(&self) -> Vec<f64> {
        let n = self.count;
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, q)| ((q - s * s / n) / (n - 1.0).max(1.0)).max(0.0))
            .collect()
    }
}

struct Run {
    moments: Vec<Moments>,
    start: EmpiricalMeasure,
    cauchy: Vec<(f64, EmpiricalMeasure)>,
    end: EmpiricalMeasure,
}

/// Long-run particle simulation from `initial_x`, checked against the
/// stationary law when the model knows it.
pub fn run_ergodicity(cfg: &ExperimentConfig) -> Result<ErgodicReport> {
    cfg.validate()?;
    let built = cfg.model.build()?;
    let model = built.model;
    let plan = cfg.plan()?;
    let lyap = built.assumptions.dissipativity.as_ref().and_then(|_| LyapunovBound::from_model(&model, &built.assumptions).ok());
    let lags: Vec<(f64, u64)> = cfg
        .cauchy_lags
        .iter()
        .filter(|&&s| s > 0.0 && s < plan.horizon())
        .map(|&s| (s, plan.steps as u64 - (s / plan.h).round() as u64))
        .collect();

    let runs: Vec<Run> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<Run> {
            let seed = mix_seed(cfg.seed, r as u64);
            let mut e = ParticleEnsemble::from_law(model.clone(), &cfg.initial_x, cfg.n, seed, 1)?;
            let p = crate::simulate::StepPlan { seed, ..plan };
            let start = e.empirical();
            let mut moments = vec![Moments::of(&e)];
            let mut cauchy = Vec::new();
            for k in 1..=p.steps {
                e.step(&p)?;
                if k % p.stride == 0 || k == p.steps {
                    moments.push(Moments::of(&e));
                }
                if r == 0 {
                    for &(s, at) in &lags {
                        if at == k as u64 {
                            cauchy.push((s, e.empirical()));
                        }
                    }
                }
            }
            Ok(Run { moments, start, cauchy, end: e.empirical() })
        })
        .collect::<Result<_>>()?;

    let mut pooled = runs[0].moments.clone();
    for run in &runs[1..] {
        for (a, b) in pooled.iter_mut().zip(&run.moments) {
            a.merge(b);
        }
    }
    let ev0 = pooled[0].v / pooled[0].count;
    let records: Vec<ErgodicRecord> = pooled
        .iter()
        .map(|m| {
            let n = m.count;
            let mean_v = m.v / n;
            let var_v = ((m.v_sq - m.v * m.v / n) / (n - 1.0).max(1.0)).max(0.0);
            let var = m.variance();
            ErgodicRecord {
                t: m.t,
                mean_norm: dot(&m.mean(), &m.mean()).sqrt(),
                variance: var.iter().sum::<f64>() / var.len() as f64,
                mean_v,
                mean_v_stderr: (var_v / n).sqrt(),
                lyapunov_bound: lyap.as_ref().map(|b| b.at(m.t, ev0)),
            }
        })
        .collect();

    let last = pooled.last().unwrap();
    let terminal_mean = last.mean();
    let terminal_variance = last.variance();
    let terminal_mean_stderr: Vec<f64> = terminal_variance.iter().map(|v| (v / last.count).sqrt()).collect();

    let first = &runs[0];
    let noise_floor = split_half_floor(&first.end)?;
    let w1_start_end = w1(&first.start, &first.end)?.value;
    let mut cauchy = Vec::new();
    for (s, m) in &first.cauchy {
        cauchy.push(CauchyPoint { lag: *s, w1: w1(m, &first.end)?.value });
    }
    cauchy.sort_by(|a, b| a.lag.total_cmp(&b.lag));

    let mut assertions = Vec::new();
    if let Some(st) = &built.stationary {
        let worst_z = terminal_mean
            .iter()
            .zip(&terminal_mean_stderr)
            .map(|(m, se)| (m - st.mean).abs() / se.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        assertions.push(Assertion::new(
            "terminal_mean_matches_stationary",
            worst_z <= 3.0,
            format!("max |mean − m*| / stderr = {worst_z:.3}"),
        ));
        let worst_rel = terminal_variance.iter().map(|v| (v / st.variance - 1.0).abs()).fold(0.0, f64::max);
        assertions.push(Assertion::new(
            "terminal_variance_matches_stationary",
            worst_rel <= 0.05,
            format!("max relative variance error {worst_rel:.4} (stationary {})", st.variance),
        ));
    }
    if !cauchy.is_empty() {
        let worst = cauchy.iter().map(|c| c.w1).fold(0.0, f64::max);
        assertions.push(Assertion::new(
            "cauchy_at_noise_floor",
            worst <= 3.0 * noise_floor,
            format!("max lagged Ŵ1 {worst:.3e} vs noise floor {noise_floor:.3e}"),
        ));
    }
    if lyap.is_some() {
        let worst = records
            .iter()
            .map(|r| r.mean_v - r.lyapunov_bound.unwrap() - 3.0 * r.mean_v_stderr)
            .fold(f64::NEG_INFINITY, f64::max);
        assertions.push(Assertion::new(
            "lyapunov_bound_dominates",
            worst <= 0.0,
            format!("max over t of E V − bound − 3·stderr = {worst:.3e}"),
        ));
    }

    Ok(ErgodicReport {
        config: cfg.clone(),
        records,
        terminal_mean,
        terminal_mean_stderr,
        terminal_variance,
        stationary_mean: built.stationary.as_ref().map(|s| s.mean),
        stationary_variance: built.stationary.as_ref().map(|s| s.variance),
        cauchy,
        noise_floor,
        w1_start_end,
        assertions,
    })
}
