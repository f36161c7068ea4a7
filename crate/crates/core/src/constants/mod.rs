//! Explicit contraction constants.
//!
//! Pipeline 1 (contractivity at infinity) yields `R1, R2, c, γ, C` and the
//! concave profile `f` of the metric `ρ(x, y) = f(|x − y|)`. Pipeline 2
//! (dissipative drift) yields `L, R3, R4, η, ξ, ε, c, K1..K5` and the
//! semi-metric `ρ₁(x, y) = f(|x − y|)(1 + εV(x) + εV(y))`, `V = 1 + |x|²`.

mod a_estimate;
mod metric;
mod moments;
mod pipeline1;
mod pipeline2;
mod profile;
mod radii;

pub use a_estimate::{a_ratio, estimate_a, AEstimate, AMethod, ASampling, AStrategy};
pub use metric::{MetricEvaluator, MetricKind, RadialFunction};
pub use moments::{moment_ceiling, LyapunovBound, MomentCeiling};
pub use pipeline1::{build_pipeline1, Pipeline1Report};
pub use pipeline2::{build_pipeline2, Pipeline2Report};
pub use profile::Tabulation;
pub use radii::{compute_l, compute_r1, compute_r2, compute_r3_r4, default_scan_max, lyapunov_constant};

use crate::model::KappaProfile;

/// `κ*` of pipeline 1: `κ(r)` where `rκ(r) ≥ −A`, else `−A/r`; `κ(0)` at the origin.
pub fn kappa_star_p1(r: f64, kappa: &KappaProfile, a: f64) -> f64 {
    let k = kappa.eval(r);
    if r <= 0.0 || r * k >= -a {
        k
    } else {
        -a / r
    }
}

/// `κ*` of pipeline 2: `max(κ(r), A)`.
pub fn kappa_star_p2(r: f64, kappa: &KappaProfile, a: f64) -> f64 {
    kappa.eval(r).max(a)
}

/// Numerical settings shared by both pipelines.
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Absolute tolerance of the adaptive Simpson rule over the whole range.
    pub quad_tol: f64,
    pub a_strategy: AStrategy,
    /// Upper end of the radius scans; `None` uses [`default_scan_max`].
    pub scan_max: Option<f64>,
    /// Number of tabulation nodes.
    pub nodes: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { quad_tol: 1e-10, a_strategy: AStrategy::Auto, scan_max: None, nodes: 4096 }
    }
}
