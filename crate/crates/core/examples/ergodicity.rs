//! Mean-field OU from `δ₃`: terminal moments against the stationary law
//! `N(0, 1/2)` and a Cauchy check on lagged empirical laws.
//!
//! ```text
//! cargo run --release -p mckean --example ergodicity
//! ```

use mckean::experiments::{run_ergodicity, ExperimentConfig};
use mckean::simulate::InitialLaw;

fn main() -> mckean::Result<()> {
    let cfg = ExperimentConfig {
        n: 4000,
        horizon: 30.0,
        stride: 100,
        replicates: 1,
        initial_x: InitialLaw::point(vec![3.0]),
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let report = run_ergodicity(&cfg)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "|mean|", "variance", "E V", "V bound");
    for r in report.records.iter().step_by(3) {
        println!(
            "{:>6.1} {:>10.5} {:>10.5} {:>10.4} {:>10.4}",
            r.t,
            r.mean_norm,
            r.variance,
            r.mean_v,
            r.lyapunov_bound.unwrap_or(f64::NAN)
        );
    }
    println!(
        "terminal mean {:.5} ± {:.5}, variance {:.5} (stationary {:?})",
        report.terminal_mean[0], report.terminal_mean_stderr[0], report.terminal_variance[0], report.stationary_variance
    );
    for c in &report.cauchy {
        println!("W1(μ_(T−{}), μ_T) = {:.4e}  (floor {:.4e})", c.lag, c.w1, report.noise_floor);
    }
    for a in &report.assertions {
        println!("{:<38} {:?}  {}", a.name, a.passed, a.detail);
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
