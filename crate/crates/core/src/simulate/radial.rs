use nalgebra::DMatrix;
use serde::Serialize;

use super::ensemble::Trajectory;
use super::{reflection_axis, transition_rc_sc};
use crate::constants::LyapunovBound;
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_t_vec, norm, trace_mmt};
use crate::model::CoefficientModel;

/// Drift and quadratic-variation rate of `r_t = |X_t − Y_t|` under the coupling.
///
/// With `Δ = σ_x − σ_y`, `α = σ_x − σ_y H` and `e = z/|z|`:
/// `drift = ⟨e, β⟩ + [rc²(tr ααᵀ − |αᵀe|²) + sc²(tr ΔΔᵀ − |Δᵀe|²)]/(2r)` and
/// `var_coeff = rc²|αᵀe|² + sc²|Δᵀe|²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RadialTerms {
    pub drift: f64,
    pub var_coeff: f64,
    pub rc: f64,
    pub sc: f64,
    /// `tr(ααᵀ) − |αᵀe|²`.
    pub alpha_trace_term: f64,
    /// `tr(ΔΔᵀ) − |Δᵀe|²`.
    pub delta_trace_term: f64,
    /// `|αᵀe|²`.
    pub alpha_e_sq: f64,
    /// `|Δᵀe|²`.
    pub delta_e_sq: f64,
}

/// Radial terms from explicit matrices; `beta = b_x − b_y`.
pub fn radial_terms(
    z: &[f64],
    sigma_x: &DMatrix<f64>,
    sigma_y: &DMatrix<f64>,
    beta: &[f64],
    rc: f64,
    sc: f64,
) -> Result<RadialTerms> {
    let d = z.len();
    let r = norm(z);
    if r == 0.0 {
        return Err(Error::InvalidInput("radial terms need x ≠ y".into()));
    }
    let inv = sigma_y
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularDiffusion(Vec::new()))?;
    let mut u = vec![0.0; d];
    reflection_axis(&inv, z, &mut u);
    let e: Vec<f64> = z.iter().map(|v| v / r).collect();

    let delta = sigma_x - sigma_y;
    // σ_y H = σ_y − 2(σ_y u)uᵀ.
    let su = sigma_y * nalgebra::DVector::from_column_slice(&u);
    let mut alpha = delta.clone();
    for i in 0..d {
        for j in 0..d {
            alpha[(i, j)] += 2.0 * su[i] * u[j];
        }
    }
    let mut ae = vec![0.0; d];
    let mut de = vec![0.0; d];
    mat_t_vec(&alpha, &e, &mut ae);
    mat_t_vec(&delta, &e, &mut de);
    let alpha_e_sq = dot(&ae, &ae);
    let delta_e_sq = dot(&de, &de);
    let alpha_trace_term = trace_mmt(&alpha) - alpha_e_sq;
    let delta_trace_term = trace_mmt(&delta) - delta_e_sq;
    let drift = dot(&e, beta) + (rc * rc * alpha_trace_term + sc * sc * delta_trace_term) / (2.0 * r);
    let var_coeff = rc * rc * alpha_e_sq + sc * sc * delta_e_sq;
    if !(drift.is_finite() && var_coeff.is_finite()) {
        return Err(Error::NonFinite("radial diagnostics".into()));
    }
    Ok(RadialTerms { drift, var_coeff, rc, sc, alpha_trace_term, delta_trace_term, alpha_e_sq, delta_e_sq })
}

/// Radial terms at `(x, y)` with `rc, sc` from the mixed coupling at bandwidth `δ`.
pub fn radial_diagnostics(
    x: &[f64],
    y: &[f64],
    b_x: &[f64],
    b_y: &[f64],
    model: &CoefficientModel,
    delta: f64,
) -> Result<RadialTerms> {
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let beta: Vec<f64> = b_x.iter().zip(b_y).map(|(a, b)| a - b).collect();
    let (rc, sc) = transition_rc_sc(norm(&z), delta);
    radial_terms(&z, &model.sigma_matrix(x), &model.sigma_matrix(y), &beta, rc, sc)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LyapunovPoint {
    pub t: f64,
    pub mean_v: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovTrace {
    pub points: Vec<LyapunovPoint>,
    /// `false` when no dissipativity constants are available.
    pub applicable: bool,
}

impl LyapunovTrace {
    /// Largest `mean_v − bound` over recorded times (negative when dominated).
    pub fn worst_excess(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| p.bound.map(|b| p.mean_v - b))
            .reduce(f64::max)
    }
}

/// Empirical `E[V(X_t)]`, `V = 1 + |x|²`, of the first system in `traj`,
/// next to `L/λ + e^{−λt}E[V(X_0)]` when `bound` is given.
pub fn lyapunov_trace(traj: &Trajectory, bound: Option<&LyapunovBound>) -> LyapunovTrace {
    let d = traj.dim;
    let n = traj.n;
    let stats = |states: &[f64]| {
        let vs: Vec<f64> = states[..n * d].chunks_exact(d).map(|x| 1.0 + dot(x, x)).collect();
        let mean = vs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        (mean, (var / n as f64).sqrt())
    };
    let ev0 = traj.snapshots.first().map(|s| stats(&s.states).0).unwrap_or(f64::NAN);
    let points = traj
        .snapshots
        .iter()
        .map(|s| {
            let (mean_v, stderr) = stats(&s.states);
            LyapunovPoint { t: s.time, mean_v, stderr, bound: bound.map(|b| b.at(s.time, ev0)) }
        })
        .collect();
    LyapunovTrace { points, applicable: bound.is_some() }
}
