//! Coupled mean-field OU systems started at δ₋₂ and δ₊₂: empirical `W1`
//! against the bound `C e^{−γt} W1(0)`.
//!
//! ```text
//! cargo run --release -p mckean --example contraction_decay
//! ```

use mckean::experiments::{run_contraction, ExperimentConfig};

fn main() -> mckean::Result<()> {
    let cfg = ExperimentConfig { n: 2000, horizon: 20.0, replicates: 8, ..Default::default() };
    let start = std::time::Instant::now();
    let report = run_contraction(&cfg)?;
    println!("γ = {:.6}, C = {}", report.constants.gamma.unwrap(), report.constants.big_c.unwrap());
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "W1", "stderr", "bound", "W_rho");
    for r in report.records.iter().step_by(10) {
        let rho = r.w_rho.map(|v| format!("{v:.5}")).unwrap_or_default();
        println!("{:>6.2} {:>10.5} {:>10.2e} {:>10.5} {:>10}", r.t, r.w1, r.w1_stderr, r.bound.unwrap_or(f64::NAN), rho);
    }
    if let Some(f) = &report.fit {
        println!("fitted decay {:.4} on t ∈ [{:.2}, {:.2}] ({} points, R² = {:.4})", -f.rate, f.window.0, f.window.1, f.points, f.r_squared);
    }
    for a in &report.assertions {
        println!("{:<34} {:?}  {}", a.name, a.passed, a.detail);
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
