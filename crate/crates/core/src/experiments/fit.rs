use serde::Serialize;

use crate::error::{Error, Result};

/// Exponential fit `v ≈ exp(intercept + rate·t)` from least squares on `ln v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `ln v` against `t`; negative for decay.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// First and last abscissa used.
    pub window: (f64, f64),
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Ordinary least squares of `y` on `x`: `(slope, intercept, R²)`.
///
/// A series with no spread in `y` is fitted exactly, so `R² = 1` there.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(format!("{} abscissae vs {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: x.len() });
    }
    if y.iter().all(|&b| b == y[0]) && x.iter().any(|&a| a != x[0]) {
        return Ok((0.0, y[0], 1.0));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("abscissae have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok((slope, intercept, r2))
}

/// Fits every point of the series; all values must be positive.
pub fn fit_rate(t: &[f64], v: &[f64]) -> Result<RateFit> {
    fit_rate_window(t, v, f64::NEG_INFINITY, 0.0)
}

/// Fits the points with `t ≥ t_min` and `v > floor`.
pub fn fit_rate_window(t: &[f64], v: &[f64], t_min: f64, floor: f64) -> Result<RateFit> {
    fit_rate_by(t, v, |i| t[i] >= t_min && v[i] > floor.max(0.0))
}

/// Like [`fit_rate_window`] with a per-point floor.
pub fn fit_rate_floors(t: &[f64], v: &[f64], t_min: f64, floors: &[f64]) -> Result<RateFit> {
    if floors.len() != v.len() {
        return Err(Error::SizeMismatch(format!("{} floors for {} values", floors.len(), v.len())));
    }
    fit_rate_by(t, v, |i| t[i] >= t_min && v[i] > floors[i].max(0.0))
}

fn fit_rate_by(t: &[f64], v: &[f64], keep: impl Fn(usize) -> bool) -> Result<RateFit> {
    if t.len() != v.len() {
        return Err(Error::SizeMismatch(format!("{} times vs {} values", t.len(), v.len())));
    }
    let idx: Vec<usize> = (0..t.len()).filter(|&i| keep(i) && v[i].is_finite()).collect();
    if idx.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_FIT_POINTS, got: idx.len() });
    }
    let x: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| v[i].ln()).collect();
    let (rate, intercept, r_squared) = ols(&x, &y)?;
    Ok(RateFit { rate, intercept, r_squared, window: (x[0], x[x.len() - 1]), points: idx.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        let v: Vec<f64> = t.iter().map(|s| 7.0 * (-0.3 * s).exp()).collect();
        let f = fit_rate(&t, &v).unwrap();
        assert!((f.rate + 0.3).abs() < 1e-9);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let f = fit_rate(&t, &[2.5; 10]).unwrap();
        assert_eq!(f.rate, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn window_drops_floor_and_transient() {
        let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|s| (-s).exp().max(1e-3)).collect();
        let f = fit_rate_window(&t, &v, 1.0, 3e-3).unwrap();
        assert!(f.window.0 >= 1.0);
        assert!((f.rate + 1.0).abs() < 1e-12);
        assert!(matches!(fit_rate_window(&t, &v, 1.0, 0.5), Err(Error::InsufficientPoints { .. })));
    }
}
