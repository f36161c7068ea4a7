//! Random spot checks of the declared assumption constants, first for a
//! correct declaration and then for one with `L1` understated.
//!
//! ```text
//! cargo run --release -p mckean --example validate_assumptions
//! ```

use mckean::model::{validate_bundle, AssumptionOverrides, BuiltinSpec, CheckStatus, ModelConfig, ProbePlan};

fn show(title: &str, cfg: &ModelConfig) -> mckean::Result<()> {
    let b = cfg.build()?;
    let report = validate_bundle(&b.model, &b.assumptions, &ProbePlan { pipeline2: true, ..Default::default() })?;
    println!("== {title}");
    for c in &report.checks {
        let tag = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "skip",
        };
        println!("  {tag} {:<26} margin {:+.3e}  {}", c.name, c.worst_margin, c.detail);
    }
    Ok(())
}

fn main() -> mckean::Result<()> {
    let honest = ModelConfig::new(BuiltinSpec::mean_field_ou(2, 0.1));
    show("declared as built", &honest)?;
    let understated = ModelConfig {
        overrides: AssumptionOverrides { l1: Some(0.01), ..Default::default() },
        ..honest
    };
    show("L1 understated", &understated)
}
