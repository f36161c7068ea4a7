use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{all_passed, Assertion, ExperimentConfig};
use crate::constants::{moment_ceiling, MomentCeiling};
use crate::error::Result;
use crate::linalg::norm;
use crate::rng::mix_seed;
use crate::simulate::{InitialLaw, ParticleEnsemble, StepPlan};

#[derive(Clone, Debug, Serialize)]
pub struct MomentRecord {
    pub t: f64,
    pub mean_abs: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub config: ExperimentConfig,
    pub ceiling: MomentCeiling,
    pub records: Vec<MomentRecord>,
    pub sup_mean_abs: f64,
    pub sup_time: f64,
    /// `E|X|` under the stationary law, when it is known, centered and `d = 1`.
    pub stationary_abs_mean: Option<f64>,
    pub assertions: Vec<Assertion>,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.assertions)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mean_abs,stderr")?;
        for r in &self.records {
            writeln!(w, "{},{},{}", r.t, r.mean_abs, r.stderr)?;
        }
        Ok(())
    }
}

/// Tracks `E|X_t|` from `X_0 = 0`, pooled over replicates, against the
/// ceiling assembled from the tail bound. `initial_x` is ignored.
pub fn run_moment_bound(cfg: &ExperimentConfig) -> Result<MomentReport> {
    cfg.validate()?;
    let built = cfg.model.build()?;
    let model = built.model;
    let ceiling = moment_ceiling(&model, &built.assumptions)?;
    let plan = cfg.plan()?;
    let origin = InitialLaw::point(vec![0.0; model.dim()]);

    let sums: Vec<Vec<(f64, f64, f64)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<(f64, f64, f64)>> {
            let seed = mix_seed(cfg.seed, r as u64);
            let mut e = ParticleEnsemble::from_law(model.clone(), &origin, cfg.n, seed, 1)?;
            let p = StepPlan { seed, ..plan };
            let mut out = Vec::new();
            e.run(&p, |e| {
                let (mut s, mut q) = (0.0, 0.0);
                for i in 0..e.len() {
                    let a = norm(e.particle(i));
                    s += a;
                    q += a * a;
                }
                out.push((e.time(), s, q));
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let total = (cfg.n * cfg.replicates) as f64;
    let records: Vec<MomentRecord> = (0..sums[0].len())
        .map(|i| {
            let s: f64 = sums.iter().map(|r| r[i].1).sum();
            let q: f64 = sums.iter().map(|r| r[i].2).sum();
            let m = s / total;
            let var = ((q - s * s / total) / (total - 1.0).max(1.0)).max(0.0);
            MomentRecord { t: sums[0][i].0, mean_abs: m, stderr: (var / total).sqrt() }
        })
        .collect();
    let (sup_time, sup_mean_abs) = records.iter().fold((0.0, f64::NEG_INFINITY), |acc, r| {
        if r.mean_abs > acc.1 {
            (r.t, r.mean_abs)
        } else {
            acc
        }
    });
    let stationary_abs_mean = match &built.stationary {
        Some(s) if model.dim() == 1 && s.mean == 0.0 => Some((2.0 * s.variance / std::f64::consts::PI).sqrt()),
        _ => None,
    };
    let assertions = vec![Assertion::new(
        "ceiling_dominates",
        sup_mean_abs <= ceiling.ceiling,
        format!("sup_t E|X_t| = {sup_mean_abs:.4} vs ceiling {:.4}", ceiling.ceiling),
    )];
    Ok(MomentReport { config: cfg.clone(), ceiling, records, sup_mean_abs, sup_time, stationary_abs_mean, assertions })
}
