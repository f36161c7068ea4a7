use serde::{Deserialize, Serialize};

use super::KappaProfile;

/// Dissipativity at infinity: `⟨x, b(x, μ)⟩ ≤ −λ|x|² + L4 |x| μ(|·|)` for `|x| ≥ R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dissipativity {
    pub lambda: f64,
    pub l4: f64,
    pub radius: f64,
}

/// Declaration `L1 + κ(r) ≤ −K` for all `r > R₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub r0: f64,
    pub k: f64,
}

/// Constants of the structural assumptions on `(b, σ)`.
#[derive(Clone, Debug)]
pub struct AssumptionBundle {
    pub kappa: KappaProfile,
    /// Measure-Lipschitz constant of the drift.
    pub l1: f64,
    /// `‖σ(x) − σ(y)‖²_F ≤ L2 |x − y|²`.
    pub l2: f64,
    /// `|b(0, μ)| ≤ L3 (1 + μ(|·|))`.
    pub l3: f64,
    /// `‖σ(x) − σ(y)‖ ≤ M`.
    pub m: f64,
    /// `‖σ(x)⁻¹‖ ≤ Λ`.
    pub lambda_inv: f64,
    /// `K₀ = sup_x tr(σσᵀ)`.
    pub sigma_trace_sup: f64,
    pub sigma_at_zero_norm: f64,
    pub dissipativity: Option<Dissipativity>,
    pub kappa_tail_negative: Option<TailBound>,
}

impl AssumptionBundle {
    /// `2Λ⁻¹ − M`.
    pub fn d_pipeline1(&self) -> f64 {
        2.0 / self.lambda_inv - self.m
    }

    /// `2Λ⁻¹ − √2 M`.
    pub fn d_pipeline2(&self) -> f64 {
        2.0 / self.lambda_inv - std::f64::consts::SQRT_2 * self.m
    }

    /// `M̃ = 2M + ‖σ(0)‖`.
    pub fn m_tilde(&self) -> f64 {
        2.0 * self.m + self.sigma_at_zero_norm
    }

    /// Scalar constants for reports.
    pub fn summary(&self) -> AssumptionSummary {
        AssumptionSummary {
            kappa_max: self.kappa.kappa_max(),
            kappa_tail: self.kappa.tail(),
            l1: self.l1,
            l2: self.l2,
            l3: self.l3,
            m: self.m,
            lambda_inv: self.lambda_inv,
            sigma_trace_sup: self.sigma_trace_sup,
            sigma_at_zero_norm: self.sigma_at_zero_norm,
            dissipativity: self.dissipativity,
            kappa_tail_negative: self.kappa_tail_negative,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionSummary {
    pub kappa_max: f64,
    pub kappa_tail: super::TailSign,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub m: f64,
    pub lambda_inv: f64,
    pub sigma_trace_sup: f64,
    pub sigma_at_zero_norm: f64,
    pub dissipativity: Option<Dissipativity>,
    pub kappa_tail_negative: Option<TailBound>,
}
