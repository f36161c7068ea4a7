use mckean::constants::LyapunovBound;
use mckean::model::{BuiltinSpec, CoefficientModel, LawView, MeasureFeatures};
use mckean::simulate::{
    lyapunov_trace, read_binary, write_binary, CoupledEnsemble, CouplingMode, InitialLaw, LawProxy,
    ParticleEnsemble, StepPlan,
};
use mckean::Error;
use nalgebra::DMatrix;

fn ou(l1: f64) -> CoefficientModel {
    BuiltinSpec::mean_field_ou(1, l1).build().unwrap().model
}

fn pair(model: &CoefficientModel, x0: f64, y0: f64, n: usize, mode: CouplingMode, delta: f64, seed: u64) -> CoupledEnsemble {
    let x = ParticleEnsemble::from_law(model.clone(), &InitialLaw::point(vec![x0]), n, seed, 1).unwrap();
    let y = ParticleEnsemble::from_law(model.clone(), &InitialLaw::point(vec![y0]), n, seed, 2).unwrap();
    CoupledEnsemble::new(x, y, delta, mode, 3).unwrap()
}

/// One-dimensional two-sample Cramér statistic `∫(F − G)² dx` for equal sizes.
fn cramer(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut fa, mut fb, mut stat) = (0.0, 0.0, 0.0);
    for w in all.windows(2) {
        if w[0].1 {
            fa += 1.0 / a.len() as f64;
        } else {
            fb += 1.0 / b.len() as f64;
        }
        stat += (fa - fb) * (fa - fb) * (w[1].0 - w[0].0);
    }
    stat
}

/// Permutation p-value of the Cramér statistic.
fn permutation_p_value(a: &[f64], b: &[f64], perms: usize, seed: u64) -> f64 {
    use rand::seq::SliceRandom;
    let observed = cramer(a, b);
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut rng = mckean::rng::task_rng(seed, 99);
    let mut exceed = 0;
    for _ in 0..perms {
        pooled.shuffle(&mut rng);
        if cramer(&pooled[..a.len()], &pooled[a.len()..]) >= observed {
            exceed += 1;
        }
    }
    (1 + exceed) as f64 / (1 + perms) as f64
}

#[test]
fn coupled_marginals_match_independent_systems() {
    let model = ou(0.1);
    let plan = StepPlan::new(0.01, 5.0, 500, 17).unwrap();
    let mut c = pair(&model, -2.0, 2.0, 4000, CouplingMode::Mixed, 1e-3, 17);
    c.simulate(&plan, &LawProxy::EmpiricalSelf).unwrap();
    let other = StepPlan { seed: 4242, ..plan };
    for (x0, coupled) in [(-2.0, c.x().states()), (2.0, c.y().states())] {
        let mut free = ParticleEnsemble::from_law(model.clone(), &InitialLaw::point(vec![x0]), 4000, 4242, 1).unwrap();
        free.simulate(&other).unwrap();
        let p = permutation_p_value(coupled, free.states(), 199, 5);
        assert!(p > 0.01, "marginal from {x0} rejected, p = {p}");
    }
}

#[test]
fn permutation_test_detects_a_shift() {
    let a: Vec<f64> = (0..500).map(|i| (i as f64 / 500.0 - 0.5) * 2.0).collect();
    let b: Vec<f64> = a.iter().map(|v| v + 0.3).collect();
    assert!(permutation_p_value(&a, &b, 199, 1) <= 0.01);
}

#[test]
fn bitwise_identical_across_worker_counts() {
    let model = BuiltinSpec::ConstDiffusionCustomKappa { dim: 2, theta: 1.0, amp: 0.3, freq: 1.5, l1: 0.1, sigma: 0.9 }
        .build()
        .unwrap()
        .model;
    let plan = StepPlan::new(0.01, 0.5, 10, 3).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let x = ParticleEnsemble::from_law(model.clone(), &InitialLaw::Gaussian { mean: vec![-1.0, 0.0], std: 1.0 }, 1500, 3, 1).unwrap();
            let y = ParticleEnsemble::from_law(model.clone(), &InitialLaw::Gaussian { mean: vec![1.0, 0.5], std: 1.0 }, 1500, 3, 2).unwrap();
            let mut c = CoupledEnsemble::new(x, y, 0.2, CouplingMode::Mixed, 3).unwrap();
            c.simulate(&plan, &LawProxy::EmpiricalSelf).unwrap()
        })
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.snapshots.len(), four.snapshots.len());
    for (a, b) in one.snapshots.iter().zip(&four.snapshots) {
        assert!(a.states.iter().zip(&b.states).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn synchronous_identical_start_stays_identical() {
    let model = ou(0.1);
    let mut c = pair(&model, 0.7, 0.7, 300, CouplingMode::Synchronous, 0.5, 8);
    c.simulate(&StepPlan::new(0.01, 2.0, 50, 8).unwrap(), &LawProxy::EmpiricalSelf).unwrap();
    assert_eq!(c.x().states(), c.y().states());
}

#[test]
fn reflection_increment_variance_is_4h() {
    let model = ou(0.0);
    let h = 0.01;
    let n = 20_000;
    let mut c = pair(&model, -1.0, 1.0, n, CouplingMode::Reflection, 0.5, 21);
    let plan = StepPlan::new(h, h, 1, 21).unwrap();
    c.step(&plan, &LawProxy::EmpiricalSelf).unwrap();
    let z0 = -2.0;
    let inc: Vec<f64> = (0..n).map(|i| (c.x().particle(i)[0] - c.y().particle(i)[0]) - z0 - (-z0) * h).collect();
    let m = inc.iter().sum::<f64>() / n as f64;
    let var = inc.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    // Sample variance of Gaussians has relative sd √(2/(n−1)).
    assert!((var / (4.0 * h) - 1.0).abs() < 4.0 * (2.0 / (n - 1) as f64).sqrt(), "var = {var}");
}

#[test]
fn tiny_delta_is_pure_reflection_while_apart() {
    let model = ou(0.1);
    let plan = StepPlan::new(0.01, 0.3, 10, 4).unwrap();
    let mut mixed = pair(&model, -1.0, 1.0, 200, CouplingMode::Mixed, 1e-6, 4);
    let mut refl = pair(&model, -1.0, 1.0, 200, CouplingMode::Reflection, 1e-6, 4);
    mixed.simulate(&plan, &LawProxy::EmpiricalSelf).unwrap();
    refl.simulate(&plan, &LawProxy::EmpiricalSelf).unwrap();
    assert!(mixed.diagnostics().r.iter().all(|&r| r > 1e-6));
    for (a, b) in mixed.x().states().iter().chain(mixed.y().states()).zip(refl.x().states().iter().chain(refl.y().states())) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn single_particle_mean_follows_discrete_ou() {
    let model = ou(0.0);
    let h = 0.01;
    let k = 100;
    let plan = StepPlan::new(h, h * k as f64, k, 0).unwrap();
    let reps = 4000;
    let finals: Vec<f64> = (0..reps)
        .map(|s| {
            let mut e = ParticleEnsemble::new(model.clone(), vec![2.0], 1).unwrap();
            e.simulate(&StepPlan { seed: s, ..plan }).unwrap();
            e.states()[0]
        })
        .collect();
    let mean = finals.iter().sum::<f64>() / reps as f64;
    let decay = (1.0 - h).powi(k as i32);
    let var = h * (1.0 - decay * decay) / (1.0 - (1.0 - h) * (1.0 - h));
    assert!((mean - 2.0 * decay).abs() < 4.0 * (var / reps as f64).sqrt(), "mean {mean} vs {}", 2.0 * decay);
}

#[test]
fn pure_diffusion_variance_grows_linearly() {
    let bm = CoefficientModel::new(
        2,
        |_x: &[f64], _l: &LawView<'_>, o: &mut [f64]| o.fill(0.0),
        |_x: &[f64], s: &mut DMatrix<f64>| s.fill_with_identity(),
        MeasureFeatures::NONE,
    )
    .unwrap();
    let n = 5000;
    let plan = StepPlan::new(0.02, 1.0, 50, 2).unwrap();
    let mut e = ParticleEnsemble::new(bm, vec![0.0; 2 * n], 1).unwrap();
    e.simulate(&plan).unwrap();
    for k in 0..2 {
        let v: f64 = (0..n).map(|i| e.particle(i)[k].powi(2)).sum::<f64>() / n as f64;
        assert!((v - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "coordinate {k}: {v}");
    }
}

#[test]
fn builtins_do_not_explode() {
    let specs = [
        BuiltinSpec::mean_field_ou(1, 0.1),
        BuiltinSpec::DoubleWellAttraction { l1: 0.1, kappa_max: 5.0, sigma: 1.0 },
        BuiltinSpec::ConstDiffusionCustomKappa { dim: 1, theta: 1.0, amp: 0.5, freq: 2.0, l1: 0.1, sigma: 1.0 },
    ];
    let plan = StepPlan::new(0.01, 50.0, 1000, 6).unwrap();
    for spec in specs {
        let model = spec.build().unwrap().model;
        let start: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 10.0 } else { -10.0 }).collect();
        let mut e = ParticleEnsemble::new(model, start, 1).unwrap();
        e.simulate(&plan).unwrap_or_else(|err| panic!("{spec:?}: {err}"));
    }
}

#[test]
fn explosion_names_particle_and_step() {
    let cubic = CoefficientModel::new(
        1,
        |x: &[f64], _l: &LawView<'_>, o: &mut [f64]| o[0] = x[0].powi(3),
        |_x: &[f64], s: &mut DMatrix<f64>| s.fill(0.0),
        MeasureFeatures::NONE,
    )
    .unwrap();
    let mut e = ParticleEnsemble::new(cubic, vec![0.0, 0.0, 5.0], 1).unwrap();
    let err = e.simulate(&StepPlan::new(0.5, 50.0, 1, 0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Explosion { particle: 2, .. }), "{err}");
}

#[test]
fn lyapunov_bound_dominates_mean_field_ou() {
    let b = BuiltinSpec::mean_field_ou(1, 0.1).build().unwrap();
    let bound = LyapunovBound::from_model(&b.model, &b.assumptions).unwrap();
    assert!((bound.at(0.0, 1.0) - 6.0).abs() < 1e-12);
    assert!((bound.at(2.0, 1.0) - (5.0 + (-2.0f64).exp())).abs() < 1e-12);
    let mut e = ParticleEnsemble::new(b.model, vec![0.0; 4000], 1).unwrap();
    let traj = e.simulate(&StepPlan::new(0.01, 5.0, 25, 9).unwrap()).unwrap();
    let trace = lyapunov_trace(&traj, Some(&bound));
    assert!(trace.applicable);
    for p in &trace.points {
        assert!(p.mean_v <= p.bound.unwrap() + 2.58 * p.stderr);
    }
    assert!(trace.worst_excess().unwrap() < 0.0);
}

#[test]
fn lyapunov_trace_without_dissipativity_is_flagged() {
    let free = CoefficientModel::new(
        1,
        |_x: &[f64], _l: &LawView<'_>, o: &mut [f64]| o[0] = 0.0,
        |_x: &[f64], s: &mut DMatrix<f64>| s.fill(1.0),
        MeasureFeatures::NONE,
    )
    .unwrap();
    let mut e = ParticleEnsemble::new(free, vec![0.0; 10], 1).unwrap();
    let traj = e.simulate(&StepPlan::new(0.1, 1.0, 5, 0).unwrap()).unwrap();
    let trace = lyapunov_trace(&traj, None);
    assert!(!trace.applicable);
    assert!(trace.points.iter().all(|p| p.bound.is_none()));
    assert_eq!(trace.points.len(), 3);
}

#[test]
fn binary_ledger_round_trip_for_coupled_runs() {
    let mut c = pair(&ou(0.1), -1.0, 1.0, 7, CouplingMode::Mixed, 0.1, 1);
    let traj = c.simulate(&StepPlan::new(0.05, 1.0, 4, 1).unwrap(), &LawProxy::EmpiricalSelf).unwrap();
    let mut buf = Vec::new();
    write_binary(&traj, &mut buf).unwrap();
    assert_eq!(&buf[..4], b"MVC1");
    assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 14);
    let back = read_binary(&buf[..]).unwrap();
    assert_eq!(back.snapshots.len(), traj.snapshots.len());
    for (a, b) in back.snapshots.iter().zip(&traj.snapshots) {
        assert_eq!(a.time, b.time);
        assert_eq!(a.states, b.states);
    }
}
