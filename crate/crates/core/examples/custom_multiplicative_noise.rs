//! A user-defined model in d = 2 with state-dependent noise
//! `σ(x) = diag(1 + 0.1 tanh x₁, 1)` and drift `−x + 0.1·mean(μ)`:
//! declare the constants, spot-check them, estimate `A`, build the metric
//! and watch a coupled pair contract.
//!
//! ```text
//! cargo run --release -p mckean --example custom_multiplicative_noise
//! ```

use mckean::constants::{build_pipeline1, PipelineOptions};
use mckean::model::{
    validate_bundle, AssumptionBundle, CheckStatus, CoefficientModel, Dissipativity, KappaProfile, LawView,
    MeasureFeatures, ProbePlan, TailBound,
};
use mckean::simulate::{CoupledEnsemble, CouplingMode, InitialLaw, LawProxy, ParticleEnsemble, StepPlan};
use mckean::transport::{exact_assignment, w1, GroundCost};
use nalgebra::DMatrix;

const L1: f64 = 0.1;

fn model() -> mckean::Result<CoefficientModel> {
    let drift = |x: &[f64], law: &LawView<'_>, out: &mut [f64]| {
        for k in 0..2 {
            out[k] = -x[k] + L1 * law.mean[k];
        }
    };
    let diffusion = |x: &[f64], s: &mut DMatrix<f64>| {
        s.fill(0.0);
        s[(0, 0)] = 1.0 + 0.1 * x[0].tanh();
        s[(1, 1)] = 1.0;
    };
    Ok(CoefficientModel::new(2, drift, diffusion, MeasureFeatures::MEAN)?.with_name("tanh_noise"))
}

fn assumptions() -> AssumptionBundle {
    AssumptionBundle {
        kappa: KappaProfile::constant(-1.0),
        l1: L1,
        // ‖σ(x) − σ(y)‖²_F = 0.01 (tanh x₁ − tanh y₁)².
        l2: 0.01,
        l3: L1,
        m: 0.2,
        lambda_inv: 1.0 / 0.9,
        sigma_trace_sup: 1.1 * 1.1 + 1.0,
        sigma_at_zero_norm: 1.0,
        dissipativity: Some(Dissipativity { lambda: 1.0, l4: L1, radius: 1.0 }),
        kappa_tail_negative: Some(TailBound { r0: 1.0, k: 1.0 - L1 }),
    }
}

fn main() -> mckean::Result<()> {
    let model = model()?;
    let a = assumptions();

    let report = validate_bundle(&model, &a, &ProbePlan { pipeline2: true, ..Default::default() })?;
    let failed: Vec<_> = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name).collect();
    println!("assumption spot checks: {} run, failed {:?}", report.checks.len(), failed);

    let p1 = build_pipeline1(&model, &a, &PipelineOptions::default())?;
    println!(
        "A = {:.6} ({:?}), D = {}, R1 = {:.4}, R2 = {:.4}, c = {:.5}, γ = {:.5}, C = {:.4}",
        p1.a, p1.a_method, p1.d, p1.r1, p1.r2, p1.c, p1.gamma, p1.big_c
    );

    let n = 500;
    let plan = StepPlan::new(0.01, 8.0, 100, 11)?;
    let x = ParticleEnsemble::from_law(model.clone(), &InitialLaw::Gaussian { mean: vec![-2.0, 0.0], std: 0.5 }, n, 11, 1)?;
    let y = ParticleEnsemble::from_law(model, &InitialLaw::Gaussian { mean: vec![2.0, 1.0], std: 0.5 }, n, 11, 2)?;
    let mut pair = CoupledEnsemble::new(x, y, 1e-3, CouplingMode::Mixed, 3)?;
    let rho = p1.metric();
    let mut w0 = None;
    println!("{:>5} {:>9} {:>9} {:>9}", "t", "W1", "bound", "W_rho");
    pair.run(&plan, &LawProxy::EmpiricalSelf, |c| {
        let (mx, my) = (c.x().empirical(), c.y().empirical());
        let d1 = w1(&mx, &my)?.value;
        let w0 = *w0.get_or_insert(d1);
        let dr = exact_assignment(&mx, &my, GroundCost::Metric(&rho))?.value;
        println!("{:>5.1} {:>9.5} {:>9.5} {:>9.5}", c.time(), d1, p1.w1_bound(c.time(), w0), dr);
        Ok(())
    })?;
    Ok(())
}
