use serde::Serialize;

use super::radii::compute_l;
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{AssumptionBundle, CoefficientModel};

/// `E[V(X_t)] ≤ L/λ + e^{−λt} E[V(X_0)]` with `V = 1 + |x|²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LyapunovBound {
    pub l: f64,
    pub lambda: f64,
}

impl LyapunovBound {
    pub fn from_model(model: &CoefficientModel, assumptions: &AssumptionBundle) -> Result<Self> {
        let diss = assumptions
            .dissipativity
            .ok_or(Error::MissingDeclaration("dissipativity constants (λ, L4, R)"))?;
        Ok(Self { l: compute_l(model, assumptions)?, lambda: diss.lambda })
    }

    pub fn at(&self, t: f64, ev0: f64) -> f64 {
        self.l / self.lambda + (-self.lambda * t).exp() * ev0
    }
}

/// Ceiling `1 + C4/K` on `sup_t E|X_t|` for `X_0 = 0` under the tail
/// declaration `L1 + κ(r) ≤ −K` for `r > R₀`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentCeiling {
    pub k0: f64,
    /// `sup_{[0,1]} |κ|`.
    pub kappa_1: f64,
    /// `|b(0, δ₀)|`.
    pub b0: f64,
    pub r0: f64,
    /// `sup_{[0,R₀]} |κ|`.
    pub kappa_r0: f64,
    pub k: f64,
    pub l1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub ceiling: f64,
}

pub fn moment_ceiling(model: &CoefficientModel, assumptions: &AssumptionBundle) -> Result<MomentCeiling> {
    let tail = assumptions
        .kappa_tail_negative
        .ok_or(Error::MissingDeclaration("kappa tail bound (R0, K)"))?;
    if !(tail.k > 0.0 && tail.r0 >= 0.0) {
        return Err(Error::InvalidInput(format!("tail bound needs K > 0 and R0 ≥ 0, got {tail:?}")));
    }
    let k0 = assumptions.sigma_trace_sup;
    let kappa_1 = assumptions.kappa.sup_abs_on(1.0);
    let b0 = norm(&model.drift_at_origin());
    let kappa_r0 = assumptions.kappa.sup_abs_on(tail.r0);
    let l1 = assumptions.l1;
    let c1 = k0 + kappa_1 + b0;
    let c2 = c1 + kappa_r0 * tail.r0;
    let c3 = c2 + (l1 + tail.k) * tail.r0;
    let c4 = c3 + 0.375 * tail.k;
    Ok(MomentCeiling {
        k0,
        kappa_1,
        b0,
        r0: tail.r0,
        kappa_r0,
        k: tail.k,
        l1,
        c1,
        c2,
        c3,
        c4,
        ceiling: 1.0 + c4 / tail.k,
    })
}
