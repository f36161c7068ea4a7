use std::sync::Arc;

use serde::Serialize;

use super::a_estimate::{estimate_a, AMethod};
use super::metric::{MetricEvaluator, RadialFunction};
use super::profile::{build_nodes, build_profile, Tabulation};
use super::radii::{compute_l, compute_r3_r4};
use super::{kappa_star_p2, PipelineOptions};
use crate::error::{Error, Result};
use crate::model::{AssumptionBundle, CoefficientModel};

/// Constants of the contraction theorem under a dissipative drift.
///
/// `η` and `ξ` can underflow for large `h`; their logarithms are reported too.
#[derive(Clone, Debug, Serialize)]
pub struct Pipeline2Report {
    pub a: f64,
    pub a_method: AMethod,
    /// `2Λ⁻¹ − √2 M`.
    pub d: f64,
    pub m_tilde: f64,
    pub l: f64,
    pub lambda: f64,
    pub r3: f64,
    pub r4: f64,
    pub h_r3: f64,
    pub h_r4: f64,
    pub ln_eta_inv: f64,
    pub ln_xi_inv: f64,
    pub eta: f64,
    pub xi: f64,
    pub epsilon: f64,
    pub c: f64,
    pub phi_r4: f64,
    pub f_r4: f64,
    pub k1: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    /// Cap `K` on `μ₀(V)` and `ν₀(V)` used for `K5`.
    pub moment_cap: f64,
    pub l1: f64,
    pub l1_star: f64,
    pub l1_star_star: f64,
    pub l1_below_star: bool,
    pub l1_below_star_star: bool,
    /// `L4 ≤ L1 ≤ λ/2`.
    pub lipschitz_order_ok: bool,
    pub quad_tol: f64,
    #[serde(skip)]
    pub table: Tabulation,
    #[serde(skip)]
    pub f: Arc<RadialFunction>,
}

impl Pipeline2Report {
    /// The semi-metric `ρ₁`.
    pub fn metric(&self) -> MetricEvaluator {
        MetricEvaluator::rho1(self.f.clone(), self.epsilon)
    }

    /// `ρ(x, y) = f(|x − y|)` with the pipeline-2 profile.
    pub fn profile_metric(&self) -> MetricEvaluator {
        MetricEvaluator::rho(self.f.clone())
    }
}

pub fn build_pipeline2(
    model: &CoefficientModel,
    assumptions: &AssumptionBundle,
    opts: &PipelineOptions,
    initial_moment_cap: f64,
) -> Result<Pipeline2Report> {
    let d = assumptions.d_pipeline2();
    if !(d > 0.0) {
        return Err(Error::Assumption(format!("2/Λ − √2 M = {d} must be positive")));
    }
    let diss = assumptions
        .dissipativity
        .ok_or(Error::MissingDeclaration("dissipativity constants (λ, L4, R)"))?;
    if !(initial_moment_cap >= 0.0) {
        return Err(Error::InvalidInput(format!("initial moment cap must be ≥ 0, got {initial_moment_cap}")));
    }
    let a_est = estimate_a(model, &opts.a_strategy)?;
    let a = a_est.value;
    let lambda = diss.lambda;
    let l = compute_l(model, assumptions)?;
    let (r3, r4) = compute_r3_r4(l, lambda)?;
    if !(r3 > 0.0) {
        return Err(Error::Assumption("degenerate sublevel set: R3 = 0".into()));
    }
    let m_tilde = assumptions.m_tilde();
    let kappa = &assumptions.kappa;
    let d2 = d * d;
    let linear = 8.0 * m_tilde / d;
    let rate = move |u: f64| 2.0 / d2 * (u * kappa_star_p2(u, kappa, a) + a) + linear;
    let prof = build_profile(&rate, build_nodes(&[r3, r4], opts.nodes), opts.quad_tol)?;
    let n = prof.r.len();
    let i3 = prof.index_of(r3);
    let ln_eta_inv = prof.ln_i(n - 1);
    let ln_xi_inv = prof.ln_i(i3);
    let eta = (-ln_eta_inv).exp();
    let xi = (-ln_xi_inv).exp();
    let p_r3 = prof.p[i3];

    let mut table = Tabulation::default();
    for i in 0..n {
        let phi = prof.phi(i);
        let (g, f) = if i == 0 {
            (1.0, 0.0)
        } else {
            let ln_i = prof.ln_i(i);
            let g_eta = 0.25 * (ln_i - ln_eta_inv).exp();
            let g_xi = 0.25 * (ln_i.min(ln_xi_inv) - ln_xi_inv).exp();
            // ∫₀ʳ φ I(s∧R3) = P(r) below R3, P(R3) + I(R3)(Φ(r) − Φ(R3)) above; ξ I(R3) = 1.
            let xi_part = if i <= i3 {
                0.25 * xi * prof.p[i]
            } else {
                0.25 * (xi * p_r3 + prof.big_phi[i] - prof.big_phi[i3])
            };
            (1.0 - g_eta - g_xi, prof.big_phi[i] - 0.25 * eta * prof.p[i] - xi_part)
        };
        table.r.push(prof.r[i]);
        table.phi.push(phi);
        table.big_phi.push(prof.big_phi[i]);
        table.g.push(g);
        table.f.push(f);
        table.df.push(phi * g);
    }
    let f = Arc::new(RadialFunction::new(table.r.clone(), table.f.clone(), table.df.clone(), 0.0));

    let h_r4 = prof.h[n - 1];
    let phi_r4 = (-h_r4).exp();
    let f_r4 = table.f[n - 1];
    let epsilon = xi * d2 / (16.0 * l);
    let c = 0.5 * (0.5 * lambda).min(eta * d2 / 8.0);
    let k1 = (2.0 * h_r4.exp()).max(1.0 / (2.0 * epsilon * f_r4));
    let k4 = 1.0 + 2.0 * l * epsilon / lambda;
    let k5 = epsilon * 2.0 * initial_moment_cap;
    let l1 = assumptions.l1;
    let k3 = l1 * k1 + 2.0 * l1 / epsilon;
    let l1_star = c / ((k1 + 2.0 / epsilon) * (k4 + k5));
    let l1_star_star = c / ((k1 + 2.0 / epsilon) * k4);

    Ok(Pipeline2Report {
        a,
        a_method: a_est.method,
        d,
        m_tilde,
        l,
        lambda,
        r3,
        r4,
        h_r3: prof.h[i3],
        h_r4,
        ln_eta_inv,
        ln_xi_inv,
        eta,
        xi,
        epsilon,
        c,
        phi_r4,
        f_r4,
        k1,
        k3,
        k4,
        k5,
        moment_cap: initial_moment_cap,
        l1,
        l1_star,
        l1_star_star,
        l1_below_star: l1 < l1_star,
        l1_below_star_star: l1 < l1_star_star,
        lipschitz_order_ok: diss.l4 <= l1 && l1 <= 0.5 * lambda,
        quad_tol: opts.quad_tol,
        table,
        f,
    })
}
