//! Wasserstein distances between point clouds: sorted coupling on the line,
//! exact assignment in the plane, the subsampled estimate above the size
//! cap, and a brute-force cross-check.
//!
//! ```text
//! cargo run --release -p mckean --example transport_distances
//! ```

use mckean::rng::task_rng;
use mckean::transport::{brute_force_transport, w1, w_cost, EmpiricalMeasure, GroundCost};
use rand_distr::{Distribution, StandardNormal};

fn cloud(n: usize, d: usize, shift: f64, seed: u64) -> EmpiricalMeasure {
    let mut rng = task_rng(seed, 0);
    let pts = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).map(|v: f64| v + shift).collect();
    EmpiricalMeasure::uniform(pts, d).expect("finite points")
}

fn main() -> mckean::Result<()> {
    let (a, b) = (EmpiricalMeasure::uniform(vec![0.0, 2.0], 1)?, EmpiricalMeasure::uniform(vec![1.0, 3.0], 1)?);
    println!("W1({{0, 2}}, {{1, 3}}) = {}", w1(&a, &b)?.value);

    let (mu, nu) = (cloud(7, 2, 0.0, 1), cloud(7, 2, 0.5, 2));
    let exact = w1(&mu, &nu)?;
    println!(
        "7 points in the plane: assignment {:.12}, brute force {:.12}",
        exact.value,
        brute_force_transport(&mu, &nu, GroundCost::Power(1.0))?
    );

    for n in [256, 1024, 4096] {
        let r = w_cost(&cloud(n, 2, 0.0, 3), &cloud(n, 2, 1.0, 4), GroundCost::Power(1.0))?;
        println!("n = {n:<5} W1 = {:.4} ± {:.4} ({:?})", r.value, r.stderr, r.method);
    }
    let r = w_cost(&cloud(2000, 1, 0.0, 5), &cloud(3000, 1, 1.0, 6), GroundCost::Power(2.0))?;
    println!("unequal sizes on the line: W2 = {:.4} ({:?}), exact value for the laws is 1", r.value, r.method);
    Ok(())
}
