//! One PASS/FAIL line per acceptance criterion, written straight to stderr
//! so it shows up without `--nocapture`.

use std::io::Write;
use std::time::{Duration, Instant};

use mckean::constants::{build_pipeline1, build_pipeline2, PipelineOptions};
use mckean::experiments::{
    chaos_rate, run_chaos, run_contraction, run_ergodicity, run_moment_bound, ExperimentConfig,
};
use mckean::linalg::{max_abs_identity_defect, trace_mmt};
use mckean::model::{BuiltinSpec, ModelConfig};
use mckean::simulate::{radial_terms, reflection_matrix, transition_rc_sc, CouplingMode, InitialLaw};
use mckean::transport::{brute_force_transport, exact_assignment, w1, EmpiricalMeasure, GroundCost};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let passed = out.passed && took < limit;
    let line = format!(
        "{} criterion {id:>2} {name}: {} [{:.2?} of {:.0?}]\n",
        if passed { "PASS" } else { "FAIL" },
        out.detail,
        took,
        limit
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    passed
}

fn rng(salt: u64) -> ChaCha8Rng {
    mckean::rng::task_rng(2024, salt)
}

fn uniform(r: &mut ChaCha8Rng, n: usize, a: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-a..a)).collect()
}

fn ou(l1: f64) -> mckean::model::Builtin {
    BuiltinSpec::mean_field_ou(1, l1).build().unwrap()
}

fn constants_oracle() -> Outcome {
    let b = ou(0.1);
    let p = build_pipeline1(&b.model, &b.assumptions, &PipelineOptions::default()).unwrap();
    let r2 = (1.0 + 17f64.sqrt()) / 2.0;
    let c = 2.0 / (r2 * r2);
    let errs = [(p.r1 - 1.0).abs(), (p.r2 - r2).abs(), (p.c - c).abs(), (p.gamma - (c - 0.2)).abs(), (p.big_c - 2.0).abs()];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    check(worst <= 1e-6, format!("R1 {:.9} R2 {:.9} c {:.9} γ {:.9} C {}, max error {worst:.1e}", p.r1, p.r2, p.c, p.gamma, p.big_c))
}

fn pipeline2_quadrature() -> Outcome {
    let b = ou(0.1);
    let p = build_pipeline2(&b.model, &b.assumptions, &PipelineOptions::default(), 2.0).unwrap();
    let r3 = 4.0f64;
    let xi_inv = ((4.0 * r3).exp() - 1.0) / 16.0 - r3 / 4.0;
    let rel = (p.ln_xi_inv.exp() / xi_inv - 1.0).abs();
    let (e3, e4) = ((p.r3 - 4.0).abs(), (p.r4 - 76f64.sqrt()).abs());
    check(
        rel <= 1e-8 && e3 <= 1e-12 && e4 <= 1e-12,
        format!("ξ⁻¹ relative error {rel:.1e}, |R3 − 4| = {e3:.1e}, |R4 − √76| = {e4:.1e}"),
    )
}

/// `σ(x) = I + 0.3 sin(⟨a, x⟩) B` with `‖B‖_F ≤ 1`, `|a| ≤ 1`, so `L2 = 0.09`.
fn trace_identity() -> Outcome {
    let mut r = rng(3);
    let d = 3;
    let l2 = 0.09;
    let (mut worst_rel, mut worst_bound) = (0.0f64, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let bm = DMatrix::from_column_slice(d, d, &uniform(&mut r, d * d, 1.0));
        let bm = &bm / bm.norm().max(1.0);
        let a = uniform(&mut r, d, 1.0);
        let an = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let sig = |p: &[f64]| {
            let phase = p.iter().zip(&a).map(|(s, t)| s * t).sum::<f64>() / an;
            DMatrix::identity(d, d) + &bm * (0.3 * phase.sin())
        };
        let (x, y) = (uniform(&mut r, d, 5.0), uniform(&mut r, d, 5.0));
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        let t = radial_terms(&z, &sig(&x), &sig(&y), &[0.0; 3], 1.0, 0.0).unwrap();
        let scale = t.alpha_trace_term.abs().max(t.delta_trace_term.abs()).max(1.0);
        worst_rel = worst_rel.max((t.alpha_trace_term - t.delta_trace_term).abs() / scale);
        let r2: f64 = z.iter().map(|v| v * v).sum();
        worst_bound = worst_bound.max(t.delta_trace_term.abs() - 2.0 * d as f64 * l2 * r2);
        assert!(trace_mmt(&(sig(&x) - sig(&y))) <= l2 * r2 * (1.0 + 1e-12));
    }
    check(
        worst_rel <= 1e-10 && worst_bound <= 1e-12,
        format!("10⁴ probes, max relative defect {worst_rel:.1e}, max excess over 2dL2|x−y|² {worst_bound:.1e}"),
    )
}

fn metric_coupling() -> Outcome {
    let b = BuiltinSpec::DoubleWellAttraction { l1: 0.05, kappa_max: 4.0, sigma: 1.0 }.build().unwrap();
    let rho = build_pipeline1(&b.model, &b.assumptions, &PipelineOptions::default()).unwrap().metric();
    let mut r = rng(4);
    let (mut tri, mut unit, mut refl) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (x, y, z) = (uniform(&mut r, 3, 6.0), uniform(&mut r, 3, 6.0), uniform(&mut r, 3, 6.0));
        tri = tri.max(rho.eval(&x, &z) - rho.eval(&x, &y) - rho.eval(&y, &z));

        let (rc, sc) = transition_rc_sc(r.random_range(0.0..2.0), r.random_range(1e-3..0.999));
        unit = unit.max((rc * rc + sc * sc - 1.0).abs());

        let k = DMatrix::from_column_slice(3, 3, &uniform(&mut r, 9, 1.0));
        let sigma = DMatrix::identity(3, 3) + &k * (0.3 / mckean::linalg::spectral_norm(&k).max(1.0));
        let h = reflection_matrix(&sigma, &x).unwrap();
        let u = sigma.clone().try_inverse().unwrap() * DVector::from_column_slice(&x);
        let u = &u / u.norm();
        refl = refl
            .max((&h - h.transpose()).amax())
            .max(max_abs_identity_defect(&(&h * h.transpose())))
            .max((&h * &u + &u).amax());
    }
    check(
        tri <= 1e-10 && unit <= 1e-10 && refl <= 1e-10,
        format!("10⁴ probes: triangle excess {tri:.1e}, |rc²+sc²−1| {unit:.1e}, H defect {refl:.1e}"),
    )
}

fn transport_oracles() -> Outcome {
    let mut r = rng(5);
    let mut worst_bf = 0.0f64;
    for k in 0..200 {
        let n = 1 + k % 8;
        let d = 1 + k % 3;
        let p = if k % 2 == 0 { 1.0 } else { 2.0 };
        let mu = EmpiricalMeasure::uniform(uniform(&mut r, n * d, 5.0), d).unwrap();
        let nu = EmpiricalMeasure::uniform(uniform(&mut r, n * d, 5.0), d).unwrap();
        let a = exact_assignment(&mu, &nu, GroundCost::Power(p)).unwrap().value;
        let bf = brute_force_transport(&mu, &nu, GroundCost::Power(p)).unwrap();
        worst_bf = worst_bf.max((a - bf).abs() / bf.max(1.0));
    }
    let mut worst_sort = 0.0f64;
    for k in 0..1000 {
        let n = 1 + k % 60;
        let mu = EmpiricalMeasure::uniform(uniform(&mut r, n, 5.0), 1).unwrap();
        let nu = EmpiricalMeasure::uniform(uniform(&mut r, n, 5.0), 1).unwrap();
        let a = exact_assignment(&mu, &nu, GroundCost::Power(1.0)).unwrap().value;
        let s = w1(&mu, &nu).unwrap().value;
        worst_sort = worst_sort.max((a - s).abs() / s.max(1.0));
    }
    check(
        worst_bf <= 1e-12 && worst_sort <= 1e-12,
        format!("200 brute-force gaps ≤ {worst_bf:.1e}, 10³ sorting gaps ≤ {worst_sort:.1e}"),
    )
}

fn contraction_cfg() -> ExperimentConfig {
    ExperimentConfig { n: 2000, h: 0.01, horizon: 20.0, replicates: 8, ..Default::default() }
}

fn contraction() -> Outcome {
    let rep = run_contraction(&contraction_cfg()).unwrap();
    let r2 = (1.0 + 17f64.sqrt()) / 2.0;
    let gamma = 2.0 / (r2 * r2) - 0.2;
    let w0 = rep.records[0].w1;
    let worst = rep
        .records
        .iter()
        .map(|r| r.w1 - 2.0 * (-gamma * r.t).exp() * w0 - 3.0 * r.w1_stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    let rate = rep.fit.as_ref().map(|f| -f.rate).unwrap_or(f64::NAN);
    check(
        worst <= 0.0 && rate >= 0.9 * gamma && rep.passed(),
        format!("max Ŵ1 − 2e^(−{gamma:.4}t)Ŵ1(0) − 3·stderr = {worst:.3e}, fitted rate {rate:.4} vs 0.9γ = {:.4}", 0.9 * gamma),
    )
}

fn synchronous_cfg() -> ExperimentConfig {
    ExperimentConfig {
        model: ModelConfig::new(BuiltinSpec::mean_field_ou(1, 0.0)),
        mode: CouplingMode::Synchronous,
        n: 2000,
        horizon: 5.0,
        replicates: 1,
        ..Default::default()
    }
}

fn synchronous_rate() -> Outcome {
    let rep = run_contraction(&synchronous_cfg()).unwrap();
    let slope = rep.pair_fit.as_ref().map(|f| f.rate).unwrap_or(f64::NAN);
    check((slope + 1.0).abs() <= 0.02, format!("slope of ln r_t = {slope:.5}"))
}

fn ergodic_cfg() -> ExperimentConfig {
    ExperimentConfig {
        n: 4000,
        horizon: 30.0,
        stride: 100,
        replicates: 1,
        initial_x: InitialLaw::point(vec![3.0]),
        ..Default::default()
    }
}

fn ergodicity() -> Outcome {
    let rep = run_ergodicity(&ergodic_cfg()).unwrap();
    let (m, se, v) = (rep.terminal_mean[0], rep.terminal_mean_stderr[0], rep.terminal_variance[0]);
    let rel = (v / 0.5 - 1.0).abs();
    check(m.abs() <= 3.0 * se && rel <= 0.05, format!("mean {m:.4} ± {se:.4}, variance {v:.4} ({:.2}% off 1/2)", 100.0 * rel))
}

fn chaos_cfg() -> ExperimentConfig {
    ExperimentConfig {
        horizon: 5.0,
        replicates: 8,
        n_grid: vec![64, 128, 256, 512, 1024, 2048],
        initial_x: InitialLaw::Gaussian { mean: vec![1.0], std: 1.0 },
        ..Default::default()
    }
}

fn chaos() -> Outcome {
    let rep = run_chaos(&chaos_cfg()).unwrap();
    let x: Vec<f64> = rep.rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rep.rows.iter().map(|r| r.w1.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / x.len() as f64, y.iter().sum::<f64>() / y.len() as f64);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
    // One constant, fitted at the smallest n, must carry every other n.
    let (g, t) = (rep.gamma, rep.horizon);
    let head = &rep.rows[0];
    let k = ((head.w_rho - (-g * t).exp() * head.w_rho_initial) * g / chaos_rate(head.n, 1).sqrt()).max(0.0);
    let worst = rep
        .rows
        .iter()
        .map(|r| r.w_rho - (-g * t).exp() * r.w_rho_initial - k * chaos_rate(r.n, 1).sqrt() / g - 3.0 * r.w_rho_stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    check(slope <= -0.2 && worst <= 0.0, format!("log-log slope {slope:.3}, K = {k:.4e}, max excess {worst:.3e}"))
}

fn moments_cfg() -> ExperimentConfig {
    ExperimentConfig { n: 10_000, horizon: 10.0, replicates: 2, ..Default::default() }
}

fn moments() -> Outcome {
    let rep = run_moment_bound(&moments_cfg()).unwrap();
    let target = 1.0 / std::f64::consts::PI.sqrt();
    let rel = (rep.sup_mean_abs / target - 1.0).abs();
    check(
        rel <= 0.05 && rep.sup_mean_abs < rep.ceiling.ceiling,
        format!("sup E|X_t| = {:.4} ({:.2}% off {target:.4}), ceiling {:.4}", rep.sup_mean_abs, 100.0 * rel, rep.ceiling.ceiling),
    )
}

fn csv(write: impl FnOnce(&mut Vec<u8>)) -> Vec<u8> {
    let mut b = Vec::new();
    write(&mut b);
    b
}

fn all_csv() -> Vec<Vec<u8>> {
    vec![
        csv(|b| run_contraction(&contraction_cfg()).unwrap().write_csv(b).unwrap()),
        csv(|b| run_contraction(&synchronous_cfg()).unwrap().write_csv(b).unwrap()),
        csv(|b| run_ergodicity(&ergodic_cfg()).unwrap().write_csv(b).unwrap()),
        csv(|b| run_chaos(&chaos_cfg()).unwrap().write_csv(b).unwrap()),
        csv(|b| run_moment_bound(&moments_cfg()).unwrap().write_csv(b).unwrap()),
    ]
}

fn determinism() -> Outcome {
    let (a, b) = (all_csv(), all_csv());
    let same = a.iter().zip(&b).filter(|(p, q)| p == q).count();
    let bytes: usize = a.iter().map(Vec::len).sum();
    check(same == a.len(), format!("{same}/{} CSV outputs bitwise identical ({bytes} bytes)", a.len()))
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        report(1, "constants oracle", s(1), constants_oracle),
        report(2, "pipeline-2 quadrature", s(1), pipeline2_quadrature),
        report(3, "trace identity", s(5), trace_identity),
        report(4, "metric and coupling invariants", s(5), metric_coupling),
        report(5, "transport oracle equivalence", s(30), transport_oracles),
        report(6, "contraction bound", s(300), contraction),
        report(7, "synchronous rate", s(30), synchronous_rate),
        report(8, "ergodicity", s(180), ergodicity),
        report(9, "propagation of chaos", s(600), chaos),
        report(10, "moment bound", s(120), moments),
        report(11, "determinism", s(1200), determinism),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
