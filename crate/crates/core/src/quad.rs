//! Adaptive Simpson quadrature and bisection.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with Richardson correction and absolute tolerance `tol`.
///
/// Fails on non-finite integrand values or when the recursion depth is
/// exhausted without meeting the tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::Quadrature { a, b });
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol.max(f64::MIN_POSITIVE), MAX_DEPTH)
        .ok_or(Error::Quadrature { a, b })
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return None;
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Rounding noise dominates once the interval is a few ulps wide.
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= noise {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Bisection for the boundary of a predicate that is `false` at `lo` and
/// `true` at `hi`. Returns the upper end of the final bracket.
pub fn bisect_predicate<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_polynomials_and_exponentials() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 4.0, epsilon = 1e-12);
        let v = adaptive_simpson(f64::exp, 0.0, 16.0, 1e-6).unwrap();
        assert_relative_eq!(v, 16f64.exp() - 1.0, max_relative = 1e-12);
        let v = adaptive_simpson(|x| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn simpson_rejects_non_finite_integrands() {
        assert!(adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn bisection_finds_threshold() {
        let r = bisect_predicate(|x| x * x > 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }
}
