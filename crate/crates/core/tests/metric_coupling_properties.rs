use mckean::constants::{build_pipeline1, MetricEvaluator, Pipeline1Report, PipelineOptions};
use mckean::linalg::{max_abs_identity_defect, trace_mmt};
use mckean::model::BuiltinSpec;
use mckean::simulate::{radial_terms, reflection_matrix, transition_rc_sc};
use mckean::transport::{w1, w_cost, EmpiricalMeasure, GroundCost};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::sync::OnceLock;

fn double_well() -> &'static Pipeline1Report {
    static P: OnceLock<Pipeline1Report> = OnceLock::new();
    P.get_or_init(|| {
        let b = BuiltinSpec::DoubleWellAttraction { l1: 0.05, kappa_max: 4.0, sigma: 1.0 }.build().unwrap();
        build_pipeline1(&b.model, &b.assumptions, &PipelineOptions::default()).unwrap()
    })
}

fn rho() -> MetricEvaluator {
    double_well().metric()
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0..6.0f64, 3)
}

/// `I + 0.3·K` with `K` of spectral norm at most one.
fn perturbed_identity(entries: &[f64], d: usize) -> DMatrix<f64> {
    let k = DMatrix::from_column_slice(d, d, entries);
    let s = mckean::linalg::spectral_norm(&k).max(1.0);
    DMatrix::identity(d, d) + k * (0.3 / s)
}

#[test]
fn rc_sc_examples() {
    assert_eq!(transition_rc_sc(0.0, 0.5), (0.0, 1.0));
    assert_eq!(transition_rc_sc(1.0, 0.5), (1.0, 0.0));
    let (rc, sc) = transition_rc_sc(0.375, 0.5);
    assert_eq!(rc, 0.5);
    assert!((sc - 0.75f64.sqrt()).abs() < 1e-15);
}

#[test]
fn reflection_examples() {
    let h = reflection_matrix(&DMatrix::from_element(1, 1, 1.0), &[3.0]).unwrap();
    assert_eq!(h[(0, 0)], -1.0);
    let h = reflection_matrix(&DMatrix::identity(2, 2), &[1.0, 0.0]).unwrap();
    assert_eq!(h, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
    assert!(reflection_matrix(&DMatrix::zeros(2, 2), &[1.0, 0.0]).is_err());
}

#[test]
fn radial_terms_identity_diffusion() {
    let i = DMatrix::identity(3, 3);
    let t = radial_terms(&[1.0, -2.0, 0.5], &i, &i, &[0.0; 3], 1.0, 0.0).unwrap();
    assert!((t.alpha_e_sq - 4.0).abs() < 1e-14);
    assert!((t.var_coeff - 4.0).abs() < 1e-14);
    assert!(t.delta_trace_term.abs() < 1e-15);
    assert!(radial_terms(&[0.0; 3], &i, &i, &[0.0; 3], 1.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn rho_is_a_metric(x in vec3(), y in vec3(), z in vec3()) {
        let m = rho();
        prop_assert_eq!(m.eval(&x, &x), 0.0);
        prop_assert_eq!(m.eval(&x, &y), m.eval(&y, &x));
        prop_assert!(m.eval(&x, &y) + m.eval(&y, &z) - m.eval(&x, &z) >= -1e-12);
    }

    #[test]
    fn rc_sc_unit_and_lipschitz(r in 0.0..2.0f64, s in 0.0..2.0f64, delta in 1e-3..0.999f64) {
        let (rc, sc) = transition_rc_sc(r, delta);
        prop_assert!((rc * rc + sc * sc - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&rc) && (0.0..=1.0).contains(&sc));
        let (rc2, _) = transition_rc_sc(s, delta);
        prop_assert!((rc - rc2).abs() <= 2.0 / delta * (r - s).abs() + 1e-12);
    }

    #[test]
    fn reflection_matrix_properties(entries in prop::collection::vec(-1.0..1.0f64, 9), z in vec3()) {
        prop_assume!(z.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let sigma = perturbed_identity(&entries, 3);
        let h = reflection_matrix(&sigma, &z).unwrap();
        prop_assert!((&h - h.transpose()).amax() <= 1e-12);
        prop_assert!(max_abs_identity_defect(&(&h * h.transpose())) <= 1e-12);
        let u = sigma.clone().try_inverse().unwrap() * DVector::from_column_slice(&z);
        let u = &u / u.norm();
        prop_assert!((&h * &u + &u).amax() <= 1e-12);
    }

    /// `tr(ααᵀ) − |αᵀe|² = tr(ΔΔᵀ) − |Δᵀe|²` with `α = Δ + 2(σ_y u)uᵀ`, and the
    /// `2dL2|x − y|²` bound for `σ(x) = I + 0.3 sin(⟨a, x⟩) B`, `‖B‖_F ≤ 1`, `|a| ≤ 1`,
    /// which has `‖σ(x) − σ(y)‖²_F ≤ 0.09|x − y|²`.
    #[test]
    fn trace_identity(
        x in vec3(),
        y in vec3(),
        b in prop::collection::vec(-1.0..1.0f64, 9),
        a in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        prop_assume!(z.iter().map(|v| v * v).sum::<f64>() > 1e-8);
        let bm = DMatrix::from_column_slice(3, 3, &b);
        let bm = &bm / bm.norm().max(1.0);
        let an = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let sig = |p: &[f64]| {
            let phase: f64 = p.iter().zip(&a).map(|(s, t)| s * t).sum::<f64>() / an;
            DMatrix::identity(3, 3) + &bm * (0.3 * phase.sin())
        };
        let (sx, sy) = (sig(&x), sig(&y));
        let t = radial_terms(&z, &sx, &sy, &[0.0; 3], 1.0, 0.0).unwrap();
        let scale = t.alpha_trace_term.abs().max(t.delta_trace_term.abs()).max(1.0);
        prop_assert!((t.alpha_trace_term - t.delta_trace_term).abs() <= 1e-10 * scale);
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let delta = &sx - &sy;
        prop_assert!(trace_mmt(&delta) <= 0.09 * r2 * (1.0 + 1e-12));
        prop_assert!(t.delta_trace_term.abs() <= 2.0 * 3.0 * 0.09 * r2 * (1.0 + 1e-12));
    }

    /// `|αᵀe|² ≥ D²` when `rc = 1`, with `D = 2/Λ − M` read off the sampled pair.
    #[test]
    fn reflected_variance_at_least_d_squared(
        x in vec3(),
        y in vec3(),
        bx in prop::collection::vec(-1.0..1.0f64, 9),
        by in prop::collection::vec(-1.0..1.0f64, 9),
    ) {
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        prop_assume!(z.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let (sx, sy) = (perturbed_identity(&bx, 3), perturbed_identity(&by, 3));
        // ‖σ⁻¹‖ ≤ 1/0.7 and ‖σ_x − σ_y‖ ≤ 0.6 for these perturbations.
        let d = 2.0 * 0.7 - 0.6;
        let t = radial_terms(&z, &sx, &sy, &[0.0; 3], 1.0, 0.0).unwrap();
        prop_assert!(t.var_coeff >= d * d - 1e-9, "{} < {}", t.var_coeff, d * d);
    }
}

fn cloud_pair(seed: u64, n: usize) -> (EmpiricalMeasure, EmpiricalMeasure) {
    use rand::Rng;
    let mut rng = mckean::rng::task_rng(seed, 1);
    let a: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-4.0..4.0)).collect();
    let b: Vec<f64> = (0..n * 2).map(|_| rng.random_range(-4.0..4.0)).collect();
    (EmpiricalMeasure::uniform(a, 2).unwrap(), EmpiricalMeasure::uniform(b, 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    /// `W_ρ ≤ W1` since `f(r) ≤ r`, and `W1 ≤ (D²/(2φ(R1))) W_ρ`.
    #[test]
    fn w_rho_sandwich(seed in any::<u64>(), n in 1usize..40) {
        let p = double_well();
        let m = p.metric();
        let (mu, nu) = cloud_pair(seed, n);
        let wr = w_cost(&mu, &nu, GroundCost::Metric(&m)).unwrap().value;
        let w = w1(&mu, &nu).unwrap().value;
        prop_assert!(wr <= w + 1e-12);
        prop_assert!(w <= p.big_c * wr * (1.0 + 1e-10) + 1e-12, "{w} > {} · {wr}", p.big_c);
    }
}
