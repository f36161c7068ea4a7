//! The mixed coupling up close: the `rc`/`sc` ramp, the reflection matrix,
//! radial drift and variance of one pair, and a small reflected ensemble.
//!
//! ```text
//! cargo run --release -p mckean --example coupled_pair
//! ```

use mckean::model::{BuiltinSpec, LawSummary, MeasureFeatures};
use mckean::simulate::{
    radial_diagnostics, reflection_matrix, transition_rc_sc, CoupledEnsemble, CouplingMode, InitialLaw, LawProxy,
    ParticleEnsemble, StepPlan,
};

fn main() -> mckean::Result<()> {
    let delta = 0.5;
    for r in [0.0, 0.2, 0.3, 0.375, 0.45, 0.5, 1.0] {
        let (rc, sc) = transition_rc_sc(r, delta);
        println!("r = {r:<5} rc = {rc:.4} sc = {sc:.4}");
    }

    let b = BuiltinSpec::ConstDiffusionCustomKappa { dim: 2, theta: 1.0, amp: 0.3, freq: 1.0, l1: 0.0, sigma: 0.8 }.build()?;
    let model = &b.model;
    let (x, y) = ([1.0, 0.5], [-0.5, 0.25]);
    let z = [x[0] - y[0], x[1] - y[1]];
    let h = reflection_matrix(&model.sigma_matrix(&y), &z)?;
    println!("H = {h}");

    let states = [x, y].concat();
    let summary = LawSummary::compute(&states, 2, MeasureFeatures::MEAN);
    let law = summary.view(&states, 2);
    let (mut bx, mut by) = ([0.0; 2], [0.0; 2]);
    model.drift(&x, &law, &mut bx);
    model.drift(&y, &law, &mut by);
    let terms = radial_diagnostics(&x, &y, &bx, &by, model, 1e-3)?;
    println!("radial drift {:.5}, variance coefficient {:.5} (D² = {:.4})", terms.drift, terms.var_coeff, b.assumptions.d_pipeline1().powi(2));

    let ou = BuiltinSpec::mean_field_ou(1, 0.0).build()?.model;
    let plan = StepPlan::new(0.01, 1.0, 25, 5)?;
    let xs = ParticleEnsemble::from_law(ou.clone(), &InitialLaw::point(vec![-1.0]), 1000, 5, 1)?;
    let ys = ParticleEnsemble::from_law(ou, &InitialLaw::point(vec![1.0]), 1000, 5, 2)?;
    let mut pair = CoupledEnsemble::new(xs, ys, 1e-3, CouplingMode::Reflection, 3)?;
    pair.run(&plan, &LawProxy::EmpiricalSelf, |c| {
        println!("t = {:.2}  mean |X − Y| = {:.4}", c.time(), c.mean_pair_distance());
        Ok(())
    })?;
    let d = pair.diagnostics();
    println!("max |rc² + sc² − 1| = {:.1e}, max reflection defect = {:.1e}", d.max_rc_sc_defect, d.max_reflection_defect);
    Ok(())
}
