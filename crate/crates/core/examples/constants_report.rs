//! Both constant pipelines for the built-in models.
//!
//! ```text
//! cargo run --release -p mckean --example constants_report
//! ```

use mckean::constants::{build_pipeline1, build_pipeline2, moment_ceiling, PipelineOptions};
use mckean::model::BuiltinSpec;

fn main() -> mckean::Result<()> {
    let specs = [
        BuiltinSpec::mean_field_ou(1, 0.1),
        BuiltinSpec::DoubleWellAttraction { l1: 0.1, kappa_max: 5.0, sigma: 1.0 },
        BuiltinSpec::ConstDiffusionCustomKappa { dim: 2, theta: 1.0, amp: 0.4, freq: 2.0, l1: 0.05, sigma: 1.0 },
    ];
    let opts = PipelineOptions::default();
    for spec in specs {
        let b = spec.build()?;
        println!("== {}", b.model.name());
        let p1 = build_pipeline1(&b.model, &b.assumptions, &opts)?;
        println!(
            "pipeline 1: A = {}, D = {}, R1 = {:.6}, R2 = {:.6}, c = {:.6e}, γ = {:.6e}, C = {:.4}",
            p1.a, p1.d, p1.r1, p1.r2, p1.c, p1.gamma, p1.big_c
        );
        match build_pipeline2(&b.model, &b.assumptions, &opts, 2.0) {
            Ok(p2) => println!(
                "pipeline 2: L = {:.4}, R3 = {:.4}, R4 = {:.4}, ln ξ⁻¹ = {:.4}, ln η⁻¹ = {:.4}, c = {:.3e}, L1* = {:.3e}",
                p2.l, p2.r3, p2.r4, p2.ln_xi_inv, p2.ln_eta_inv, p2.c, p2.l1_star
            ),
            Err(e) => println!("pipeline 2: {e}"),
        }
        match moment_ceiling(&b.model, &b.assumptions) {
            Ok(m) => println!("moment ceiling: K = {:.4}, ceiling = {:.4}", m.k, m.ceiling),
            Err(e) => println!("moment ceiling: {e}"),
        }
    }
    Ok(())
}
