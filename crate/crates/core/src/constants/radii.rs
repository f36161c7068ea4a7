use crate::error::{Error, Result};
use crate::model::{AssumptionBundle, CoefficientModel, KappaProfile, TailSign};
use crate::linalg::norm;
use crate::quad::bisect_predicate;

const SCAN_POINTS: usize = 20_001;
const BISECT_TOL: f64 = 1e-8;

/// `10·max(R1, 1) + 100`.
pub fn default_scan_max(r1: f64) -> f64 {
    10.0 * r1.max(1.0) + 100.0
}

fn scan_grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect()
}

fn require_negative_tail(kappa: &KappaProfile, what: &'static str) -> Result<()> {
    if kappa.tail() == TailSign::Negative {
        Ok(())
    } else {
        Err(Error::TailNotCertified(what))
    }
}

/// `R1 = 1 ∨ inf{R ≥ 0 : rκ(r) < −A for all r ≥ R}`, scanned on `[0, scan_max]`.
pub fn compute_r1(kappa: &KappaProfile, a: f64, scan_max: f64) -> Result<f64> {
    require_negative_tail(kappa, "R1")?;
    let holds = |r: f64| r * kappa.eval(r) < -a;
    let grid = scan_grid(0.0, scan_max);
    let last_fail = grid
        .iter()
        .rposition(|&r| !holds(r))
        .expect("rκ(r) < −A fails at r = 0");
    if last_fail + 1 == grid.len() {
        return Err(Error::RadiusUndetermined { which: "R1", scan_max });
    }
    let r = bisect_predicate(holds, grid[last_fail], grid[last_fail + 1], BISECT_TOL);
    Ok(r.max(1.0))
}

/// Smallest `R > R1` with `sup_{r ≥ R} κ(r) ≤ −(D²/(R(R − R1)) + A/R)`.
///
/// The left side is nonincreasing and the right side increasing in `R`, so
/// the condition is monotone and bisection applies.
pub fn compute_r2(kappa: &KappaProfile, a: f64, d: f64, r1: f64, scan_max: f64) -> Result<f64> {
    require_negative_tail(kappa, "R2")?;
    if scan_max <= r1 {
        return Err(Error::RadiusUndetermined { which: "R2", scan_max });
    }
    let grid = scan_grid(r1, scan_max);
    let mut suffix = vec![f64::NEG_INFINITY; grid.len() + 1];
    for i in (0..grid.len()).rev() {
        suffix[i] = suffix[i + 1].max(kappa.eval(grid[i]));
    }
    let holds = |big_r: f64| {
        if big_r <= r1 {
            return false;
        }
        let j = grid.partition_point(|&g| g < big_r);
        let sup = kappa.eval(big_r).max(suffix[j]);
        sup <= -(d * d / (big_r * (big_r - r1)) + a / big_r)
    };
    let first = (1..grid.len())
        .find(|&j| holds(grid[j]))
        .ok_or(Error::RadiusUndetermined { which: "R2", scan_max })?;
    Ok(bisect_predicate(holds, grid[first - 1], grid[first], BISECT_TOL))
}

/// `L = K₀ + κ_R R² + R|b(0, δ₀)| + 2λR² + λ`.
pub fn lyapunov_constant(k0: f64, kappa_r: f64, radius: f64, b0: f64, lambda: f64) -> f64 {
    k0 + kappa_r * radius * radius + radius * b0 + 2.0 * lambda * radius * radius + lambda
}

/// Lyapunov constant of the model, with `κ_R = sup_{[0,R]} |κ|`.
pub fn compute_l(model: &CoefficientModel, assumptions: &AssumptionBundle) -> Result<f64> {
    let diss = assumptions
        .dissipativity
        .ok_or(Error::MissingDeclaration("dissipativity constants (λ, L4, R)"))?;
    let kappa_r = assumptions.kappa.sup_abs_on(diss.radius);
    let b0 = norm(&model.drift_at_origin());
    Ok(lyapunov_constant(assumptions.sigma_trace_sup, kappa_r, diss.radius, b0, diss.lambda))
}

/// Diameters of `{V(x) + V(y) ≤ 2L/λ}` and `{V(x) + V(y) ≤ 8L/λ}`.
pub fn compute_r3_r4(l: f64, lambda: f64) -> Result<(f64, f64)> {
    let s = 2.0 * l / lambda;
    if !(s >= 2.0) {
        return Err(Error::EmptySublevelSet(s));
    }
    Ok(((2.0 * (s - 2.0)).sqrt(), (2.0 * (4.0 * s - 2.0)).sqrt()))
}
