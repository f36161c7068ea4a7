use std::sync::Arc;

use serde::Serialize;

use super::a_estimate::{estimate_a, AMethod};
use super::metric::{MetricEvaluator, RadialFunction};
use super::profile::{build_nodes, build_profile, Tabulation};
use super::radii::{compute_r1, compute_r2, default_scan_max};
use super::{kappa_star_p1, PipelineOptions};
use crate::error::{Error, Result};
use crate::model::{AssumptionBundle, CoefficientModel};

/// Constants of the contraction theorem under contractivity at infinity.
#[derive(Clone, Debug, Serialize)]
pub struct Pipeline1Report {
    pub a: f64,
    pub a_method: AMethod,
    /// `2Λ⁻¹ − M`.
    pub d: f64,
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
    pub gamma: f64,
    pub big_c: f64,
    pub l1: f64,
    pub phi_r1: f64,
    /// `∫₀^{R2} Φ/φ`.
    pub integral_r2: f64,
    pub g_r2: f64,
    pub contractive: bool,
    pub quad_tol: f64,
    pub scan_max: f64,
    #[serde(skip)]
    pub table: Tabulation,
    #[serde(skip)]
    pub f: Arc<RadialFunction>,
}

impl Pipeline1Report {
    /// The metric `ρ(x, y) = f(|x − y|)`.
    pub fn metric(&self) -> MetricEvaluator {
        MetricEvaluator::rho(self.f.clone())
    }

    /// `W1(μ_t, ν_t) ≤ C e^{−γt} W1(μ_0, ν_0)`.
    pub fn w1_bound(&self, t: f64, w1_0: f64) -> f64 {
        self.big_c * (-self.gamma * t).exp() * w1_0
    }

    pub fn kappa_star(&self, assumptions: &AssumptionBundle, r: f64) -> f64 {
        kappa_star_p1(r, &assumptions.kappa, self.a)
    }
}

pub fn build_pipeline1(
    model: &CoefficientModel,
    assumptions: &AssumptionBundle,
    opts: &PipelineOptions,
) -> Result<Pipeline1Report> {
    let d = assumptions.d_pipeline1();
    if !(d > 0.0) {
        return Err(Error::Assumption(format!("2/Λ − M = {d} must be positive")));
    }
    let a_est = estimate_a(model, &opts.a_strategy)?;
    let a = a_est.value;
    let kappa = &assumptions.kappa;

    let r1 = compute_r1(kappa, a, opts.scan_max.unwrap_or(default_scan_max(1.0)))?;
    let scan_max = opts.scan_max.unwrap_or(default_scan_max(r1));
    let r2 = compute_r2(kappa, a, d, r1, scan_max)?;

    let d2 = d * d;
    let rate = move |u: f64| 2.0 / d2 * (u * kappa_star_p1(u, kappa, a) + a);
    let prof = build_profile(&rate, build_nodes(&[r1, r2], opts.nodes), opts.quad_tol)?;
    let n = prof.r.len();
    let i_r1 = prof.index_of(r1);
    let ln_i_r2 = prof.ln_i(n - 1);
    let integral_r2 = ln_i_r2.exp();
    let c = 0.25 * d2 * (-ln_i_r2).exp();
    let phi_r1 = prof.phi(i_r1);

    let mut table = Tabulation::default();
    for i in 0..n {
        let phi = prof.phi(i);
        // g = 1 − I/(2 I(R2)), f = Φ − P/(2 I(R2)).
        let g = if i == 0 { 1.0 } else { 1.0 - 0.5 * (prof.ln_i(i) - ln_i_r2).exp() };
        let f = prof.big_phi[i] - 0.5 * prof.p[i] * (-ln_i_r2).exp();
        table.r.push(prof.r[i]);
        table.phi.push(phi);
        table.big_phi.push(prof.big_phi[i]);
        table.g.push(g);
        table.f.push(f);
        table.df.push(phi * g);
    }
    let g_r2 = table.g[n - 1];
    let tail_slope = table.df[n - 1];
    let f = Arc::new(RadialFunction::new(table.r.clone(), table.f.clone(), table.df.clone(), tail_slope));

    let gamma = c - assumptions.l1 * d2 / (2.0 * phi_r1);
    Ok(Pipeline1Report {
        a,
        a_method: a_est.method,
        d,
        r1,
        r2,
        c,
        gamma,
        big_c: d2 / (2.0 * phi_r1),
        l1: assumptions.l1,
        phi_r1,
        integral_r2,
        g_r2,
        contractive: gamma > 0.0,
        quad_tol: opts.quad_tol,
        scan_max,
        table,
        f,
    })
}
