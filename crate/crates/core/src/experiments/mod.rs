//! Monte Carlo experiments: coupled contraction, propagation of chaos,
//! ergodicity and moment bounds, with rate fits and report writers.

mod chaos;
mod config;
mod contraction;
mod ergodic;
mod fit;
mod moments;
mod report;

pub use chaos::{chaos_rate, run_chaos, ChaosReport, ChaosRow};
pub use config::{ExperimentConfig, PipelineChoice};
pub use contraction::{run_contraction, ContractionConstants, ContractionRecord, ContractionReport};
pub use ergodic::{run_ergodicity, CauchyPoint, ErgodicRecord, ErgodicReport};
pub use fit::{fit_rate, fit_rate_floors, fit_rate_window, ols, RateFit, MIN_FIT_POINTS};
pub use moments::{run_moment_bound, MomentRecord, MomentReport};
pub use report::{svg_line_plot, write_json, Series};

use serde::Serialize;

use crate::error::Result;
use crate::simulate::InitialLaw;
use crate::transport::{w1, EmpiricalMeasure};

/// Outcome of one checked claim. `passed` is `None` when the claim's
/// hypotheses fail and the check was not attempted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: Option<bool>,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed: Some(passed), detail }
    }

    pub fn skipped(name: &str, detail: String) -> Self {
        Self { name: name.into(), passed: None, detail }
    }
}

pub(crate) fn all_passed(checks: &[Assertion]) -> bool {
    checks.iter().all(|a| a.passed != Some(false))
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Empirical `W1` between two independent `N`-samples of the same law,
/// estimated from the halves of one cloud: halves of size `N/2` sit
/// `√2` farther apart than full clouds.
pub(crate) fn split_half_floor(cloud: &EmpiricalMeasure) -> Result<f64> {
    let n = cloud.len();
    if n < 4 {
        return Ok(0.0);
    }
    let half = n / 2;
    let a: Vec<usize> = (0..half).collect();
    let b: Vec<usize> = (half..2 * half).collect();
    Ok(w1(&cloud.select(&a), &cloud.select(&b))?.value / std::f64::consts::SQRT_2)
}

/// `E[1 + |X₀|²]` under an initial law.
pub(crate) fn initial_v_mean(law: &InitialLaw, dim: usize) -> Result<f64> {
    Ok(match law {
        InitialLaw::Point { at } => 1.0 + at.iter().map(|v| v * v).sum::<f64>(),
        InitialLaw::Gaussian { mean, std } => 1.0 + mean.iter().map(|v| v * v).sum::<f64>() + dim as f64 * std * std,
        InitialLaw::File { path } => {
            let c = EmpiricalMeasure::from_csv_path(path)?;
            let s: f64 = c.points().iter().map(|v| v * v).sum();
            1.0 + s / c.len() as f64
        }
    })
}

/// Comma-separated optional value; empty when absent.
pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
