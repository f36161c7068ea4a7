use std::sync::Arc;

use serde::Serialize;

use crate::linalg::{dist, dot};

/// Interpolant of a tabulated concave profile `f` with exact derivative data.
///
/// Cubic Hermite on each cell, slopes passed through the Fritsch–Carlson
/// limiter so the interpolant stays monotone. Beyond the cutoff `f` continues
/// linearly with `tail_slope` (zero gives the constant extension).
#[derive(Clone, Debug)]
pub struct RadialFunction {
    r: Vec<f64>,
    f: Vec<f64>,
    ml: Vec<f64>,
    mr: Vec<f64>,
    tail_slope: f64,
}

impl RadialFunction {
    pub fn new(r: Vec<f64>, f: Vec<f64>, df: Vec<f64>, tail_slope: f64) -> Self {
        let cells = r.len().saturating_sub(1);
        let mut ml = Vec::with_capacity(cells);
        let mut mr = Vec::with_capacity(cells);
        for i in 0..cells {
            let w = r[i + 1] - r[i];
            let secant = (f[i + 1] - f[i]) / w;
            let (mut a, mut b) = (df[i], df[i + 1]);
            if secant == 0.0 {
                a = 0.0;
                b = 0.0;
            } else {
                let (al, be) = (a / secant, b / secant);
                let s = al * al + be * be;
                if s > 9.0 {
                    let tau = 3.0 / s.sqrt();
                    a = tau * al * secant;
                    b = tau * be * secant;
                }
            }
            ml.push(a);
            mr.push(b);
        }
        Self { r, f, ml, mr, tail_slope }
    }

    pub fn cutoff(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    fn cell(&self, r: f64) -> usize {
        (self.r.partition_point(|&x| x <= r) - 1).min(self.r.len() - 2)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.f[0];
        }
        let end = self.cutoff();
        if r >= end {
            return self.f[self.f.len() - 1] + self.tail_slope * (r - end);
        }
        let i = self.cell(r);
        let w = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / w;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.f[i] + h10 * w * self.ml[i] + h01 * self.f[i + 1] + h11 * w * self.mr[i]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let end = self.cutoff();
        if r >= end {
            return self.tail_slope;
        }
        let r = r.max(0.0);
        let i = self.cell(r);
        let w = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / w;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.f[i] + d01 * self.f[i + 1]) / w + d10 * self.ml[i] + d11 * self.mr[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `f(|x − y|)`.
    Rho,
    /// `f(|x − y|)(1 + εV(x) + εV(y))`.
    Rho1,
}

#[derive(Clone, Debug)]
pub struct MetricEvaluator {
    kind: MetricKind,
    f: Arc<RadialFunction>,
    epsilon: f64,
}

impl MetricEvaluator {
    pub fn rho(f: Arc<RadialFunction>) -> Self {
        Self { kind: MetricKind::Rho, f, epsilon: 0.0 }
    }

    pub fn rho1(f: Arc<RadialFunction>, epsilon: f64) -> Self {
        Self { kind: MetricKind::Rho1, f, epsilon }
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn profile(&self) -> &RadialFunction {
        &self.f
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let base = self.f.eval(dist(x, y));
        match self.kind {
            MetricKind::Rho => base,
            MetricKind::Rho1 => {
                let vx = 1.0 + dot(x, x);
                let vy = 1.0 + dot(y, y);
                base * (1.0 + self.epsilon * vx + self.epsilon * vy)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        // f = r − r³/12 on [0, 1]: Hermite with exact derivatives is exact for cubics.
        let r: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let f: Vec<f64> = r.iter().map(|x| x - x * x * x / 12.0).collect();
        let df: Vec<f64> = r.iter().map(|x| 1.0 - x * x / 4.0).collect();
        let rf = RadialFunction::new(r, f, df, 0.75);
        for k in 0..100 {
            let x = k as f64 / 100.0;
            assert!((rf.eval(x) - (x - x * x * x / 12.0)).abs() < 1e-14);
        }
        let f1 = 1.0 - 1.0 / 12.0;
        assert!((rf.eval(2.0) - (f1 + 0.75)).abs() < 1e-14);
        assert_eq!(rf.derivative(3.0), 0.75);
    }
}
