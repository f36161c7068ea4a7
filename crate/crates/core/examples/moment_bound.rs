//! `E|X_t|` from the origin for the mean-field OU model, against the
//! ceiling assembled from the tail bound `L1 + κ(r) < −K`.
//!
//! ```text
//! cargo run --release -p mckean --example moment_bound
//! ```

use mckean::experiments::{run_moment_bound, ExperimentConfig};

fn main() -> mckean::Result<()> {
    let cfg = ExperimentConfig { n: 10_000, horizon: 10.0, replicates: 2, ..Default::default() };
    let start = std::time::Instant::now();
    let report = run_moment_bound(&cfg)?;
    let c = &report.ceiling;
    println!("K = {}, C1..C4 = {:.4} {:.4} {:.4} {:.4}, ceiling {:.4}", c.k, c.c1, c.c2, c.c3, c.c4, c.ceiling);
    for r in report.records.iter().step_by(10) {
        println!("t = {:>5.2}  E|X_t| = {:.5} ± {:.5}", r.t, r.mean_abs, r.stderr);
    }
    println!(
        "sup E|X_t| = {:.5} at t = {:.2}; stationary E|X| = {:.5}",
        report.sup_mean_abs,
        report.sup_time,
        report.stationary_abs_mean.unwrap_or(f64::NAN)
    );
    for a in &report.assertions {
        println!("{:<20} {:?}  {}", a.name, a.passed, a.detail);
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
