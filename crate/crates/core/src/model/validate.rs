use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::{AssumptionBundle, CoefficientModel, LawSummary};
use crate::error::{Error, Result};
use crate::linalg::{dot, max_abs_identity_defect, norm, spectral_norm, trace_mmt};
use crate::rng::task_rng;
use crate::transport::{w1, EmpiricalMeasure};

/// Random spot-check plan: states from `N(0, state_std² I)`, measures as
/// empirical laws of `cloud_size` such states.
#[derive(Clone, Debug)]
pub struct ProbePlan {
    pub n_probe: usize,
    pub seed: u64,
    pub cloud_size: usize,
    pub state_std: f64,
    pub pipeline1: bool,
    pub pipeline2: bool,
}

impl Default for ProbePlan {
    fn default() -> Self {
        Self { n_probe: 1000, seed: 0, cloud_size: 32, state_std: 5.0, pipeline1: true, pipeline2: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one inequality. `worst_margin` is `min(rhs − lhs)` over probes.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub worst_margin: f64,
    pub worst_probe: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Relative slack allowed before an inequality counts as violated.
const REL_TOL: f64 = 1e-9;

struct Tracker {
    name: &'static str,
    worst: f64,
    worst_probe: Option<usize>,
    failed: bool,
    seen: bool,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, worst: f64::INFINITY, worst_probe: None, failed: false, seen: false }
    }

    /// Records `lhs ≤ rhs`.
    fn record(&mut self, probe: usize, lhs: f64, rhs: f64) {
        self.seen = true;
        let margin = rhs - lhs;
        if margin < self.worst {
            self.worst = margin;
            self.worst_probe = Some(probe);
        }
        if margin < -REL_TOL * 1f64.max(lhs.abs()).max(rhs.abs()) {
            self.failed = true;
        }
    }

    fn finish(self, detail: impl Into<String>) -> AssumptionCheck {
        let status = match (self.seen, self.failed) {
            (false, _) => CheckStatus::Skipped,
            (true, true) => CheckStatus::Fail,
            (true, false) => CheckStatus::Pass,
        };
        AssumptionCheck {
            name: self.name,
            status,
            worst_margin: self.worst,
            worst_probe: self.worst_probe,
            detail: detail.into(),
        }
    }
}

fn scalar_check(name: &'static str, lhs: f64, rhs: f64, detail: String) -> AssumptionCheck {
    let mut t = Tracker::new(name);
    t.record(0, lhs, rhs);
    t.finish(detail)
}

fn skipped(name: &'static str, detail: &str) -> AssumptionCheck {
    Tracker::new(name).finish(detail)
}

fn finite_or_err(values: &[f64], what: &str, probe: usize, x: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} at probe {probe}, x = {x:?}")))
    }
}

/// Spot-checks every declared inequality on random probes.
pub fn validate_bundle(
    model: &CoefficientModel,
    assumptions: &AssumptionBundle,
    plan: &ProbePlan,
) -> Result<ValidationReport> {
    let d = model.dim();
    let a = assumptions;
    let mut rng = task_rng(plan.seed, 0x7661_6c69);
    let normal = Normal::new(0.0, plan.state_std)
        .map_err(|e| Error::InvalidInput(format!("state_std: {e}")))?;
    let draw = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..n * d).map(|_| normal.sample(rng)).collect()
    };

    let mut lipschitz = Tracker::new("one_sided_lipschitz");
    let mut sigma_lip = Tracker::new("sigma_lipschitz");
    let mut growth = Tracker::new("drift_growth");
    let mut diff_bound = Tracker::new("sigma_difference_bound");
    let mut inv_bound = Tracker::new("sigma_inverse_bound");
    let mut inv_consistency = Tracker::new("sigma_inverse_consistency");
    let mut trace_sup = Tracker::new("sigma_trace_sup");
    let mut kappa_range = Tracker::new("kappa_bounded");
    let mut dissip = Tracker::new("dissipativity");

    let mut sx = DMatrix::zeros(d, d);
    let mut sy = DMatrix::zeros(d, d);
    let mut inv = DMatrix::zeros(d, d);
    let mut bx = vec![0.0; d];
    let mut by = vec![0.0; d];
    let zero = vec![0.0; d];

    for probe in 0..plan.n_probe {
        let x = draw(1, &mut rng);
        let y = draw(1, &mut rng);
        let mu_pts = draw(plan.cloud_size, &mut rng);
        let nu_pts = draw(plan.cloud_size, &mut rng);
        let mu_sum = model.summarize(&mu_pts);
        let nu_sum = model.summarize(&nu_pts);
        let mu = mu_sum.view(&mu_pts, d);
        let nu = nu_sum.view(&nu_pts, d);
        let w = w1(&EmpiricalMeasure::uniform(mu_pts.clone(), d)?, &EmpiricalMeasure::uniform(nu_pts.clone(), d)?)?
            .value;

        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        let r = norm(&z);
        let kappa = a.kappa.eval(r);
        kappa_range.record(probe, kappa.abs(), a.kappa.kappa_max());

        // Different laws, then a shared law: the latter exposes tightness.
        for (law_y, w_val) in [(&nu, w), (&mu, 0.0)] {
            model.drift(&x, &mu, &mut bx);
            model.drift(&y, law_y, &mut by);
            finite_or_err(&bx, "drift", probe, &x)?;
            finite_or_err(&by, "drift", probe, &y)?;
            let diff: Vec<f64> = bx.iter().zip(&by).map(|(p, q)| p - q).collect();
            lipschitz.record(probe, dot(&z, &diff), kappa * r * r + a.l1 * w_val * r);
        }

        model.sigma(&x, &mut sx);
        model.sigma(&y, &mut sy);
        finite_or_err(sx.as_slice(), "diffusion", probe, &x)?;
        finite_or_err(sy.as_slice(), "diffusion", probe, &y)?;
        let delta = &sx - &sy;
        sigma_lip.record(probe, trace_mmt(&delta), a.l2 * r * r);
        diff_bound.record(probe, spectral_norm(&delta), a.m);
        trace_sup.record(probe, trace_mmt(&sx), a.sigma_trace_sup);

        model.sigma_inverse(&x, &sx, &mut inv)?;
        finite_or_err(inv.as_slice(), "diffusion inverse", probe, &x)?;
        inv_bound.record(probe, spectral_norm(&inv), a.lambda_inv);
        let defect = max_abs_identity_defect(&(&sx * &inv));
        inv_consistency.record(probe, defect, 1e-10);

        let zero_sum = LawSummary::compute(&mu_pts, d, model.features());
        model.drift(&zero, &zero_sum.view(&mu_pts, d), &mut bx);
        finite_or_err(&bx, "drift at origin", probe, &zero)?;
        let mu_abs: f64 = mu_pts.chunks_exact(d).map(norm).sum::<f64>() / plan.cloud_size as f64;
        growth.record(probe, norm(&bx), a.l3 * (1.0 + mu_abs));

        if let Some(diss) = a.dissipativity {
            let nx = norm(&x);
            if nx >= diss.radius {
                model.drift(&x, &mu, &mut bx);
                dissip.record(probe, dot(&x, &bx), -diss.lambda * nx * nx + diss.l4 * nx * mu_abs);
            }
        }
    }

    let mut checks = vec![
        lipschitz.finish("<x−y, b(x,μ)−b(y,ν)> ≤ κ(|x−y|)|x−y|² + L1 W1(μ,ν)|x−y|"),
        kappa_range.finish("|κ(r)| ≤ κ_max"),
        sigma_lip.finish("‖σ(x)−σ(y)‖_F² ≤ L2 |x−y|²"),
        growth.finish("|b(0,μ)| ≤ L3 (1 + μ(|·|))"),
        diff_bound.finish("‖σ(x)−σ(y)‖ ≤ M"),
        inv_bound.finish("‖σ(x)⁻¹‖ ≤ Λ"),
        inv_consistency.finish("‖σσ⁻¹ − I‖_max ≤ 1e-10"),
        trace_sup.finish("tr(σσᵀ) ≤ K0"),
    ];

    let s0 = model.sigma_matrix(&zero);
    checks.push(scalar_check(
        "sigma_at_zero_norm",
        spectral_norm(&s0),
        a.sigma_at_zero_norm,
        "‖σ(0)‖ ≤ declared value".into(),
    ));

    if plan.pipeline1 {
        let d1 = a.d_pipeline1();
        checks.push(scalar_check("d_pipeline1_positive", 0.0, d1, format!("2/Λ − M = {d1}")));
    }
    if plan.pipeline2 {
        let d2 = a.d_pipeline2();
        checks.push(scalar_check("d_pipeline2_positive", 0.0, d2, format!("2/Λ − √2 M = {d2}")));
        match a.dissipativity {
            Some(diss) => {
                checks.push(dissip.finish("<x, b(x,μ)> ≤ −λ|x|² + L4|x|μ(|·|) for |x| ≥ R"));
                checks.push(scalar_check("l4_le_l1", diss.l4, a.l1, "L4 ≤ L1".into()));
                checks.push(scalar_check("l1_le_half_lambda", a.l1, 0.5 * diss.lambda, "L1 ≤ λ/2".into()));
            }
            None => {
                let mut c = skipped("dissipativity", "not declared");
                c.status = CheckStatus::Fail;
                checks.push(c);
            }
        }
    } else if a.dissipativity.is_some() {
        checks.push(dissip.finish("<x, b(x,μ)> ≤ −λ|x|² + L4|x|μ(|·|) for |x| ≥ R"));
    }

    match a.kappa_tail_negative {
        Some(t) => {
            let mut tr = Tracker::new("kappa_tail_bound");
            for i in 1..=4000 {
                let r = t.r0 + 0.025 * i as f64;
                tr.record(i, a.l1 + a.kappa.eval(r), -t.k);
            }
            let probe_r: f64 = t.r0 + rng.random::<f64>() * 1e3;
            tr.record(0, a.l1 + a.kappa.eval(probe_r), -t.k);
            checks.push(tr.finish("L1 + κ(r) ≤ −K for r > R0"));
        }
        None => checks.push(skipped("kappa_tail_bound", "not declared")),
    }

    Ok(ValidationReport { checks })
}
