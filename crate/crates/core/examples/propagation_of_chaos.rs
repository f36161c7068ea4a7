//! Distance between `n`-particle systems and a large reference system at
//! time `T`, for `n` from 64 to 2048, with the fitted chaos bound.
//!
//! ```text
//! cargo run --release -p mckean --example propagation_of_chaos
//! ```

use mckean::experiments::{run_chaos, ExperimentConfig};
use mckean::simulate::InitialLaw;

fn main() -> mckean::Result<()> {
    let cfg = ExperimentConfig {
        horizon: 5.0,
        replicates: 8,
        initial_x: InitialLaw::Gaussian { mean: vec![1.0], std: 1.0 },
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let report = run_chaos(&cfg)?;
    println!("γ = {:.5}, n_ref = {}, reference floor {:.4e}", report.gamma, report.n_ref, report.reference_floor);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}", "n", "W1", "stderr", "W_rho", "W_rho(0)", "bound");
    for r in &report.rows {
        println!(
            "{:>6} {:>10.5} {:>10.2e} {:>10.5} {:>10.5} {:>10.5}",
            r.n,
            r.w1,
            r.w1_stderr,
            r.w_rho,
            r.w_rho_initial,
            r.bound.unwrap_or(f64::NAN)
        );
    }
    println!("log-log slope {:.3} (R² = {:.3}), fitted K = {:?}", report.slope, report.slope_r_squared, report.fit_c);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for a in &report.assertions {
        println!("{:<24} {:?}  {}", a.name, a.passed, a.detail);
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
