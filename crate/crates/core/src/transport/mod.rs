//! Empirical optimal transport.
//!
//! One-dimensional problems with convex power costs are solved exactly by the
//! quantile coupling. Everything else goes through the exact assignment
//! solver up to a size cap, beyond which an average over random subsamples is
//! reported together with its standard error.

pub mod assignment;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::MetricEvaluator;
use crate::error::{Error, Result};
use crate::linalg::dist;
use crate::rng::task_rng;

/// Weighted point cloud; `weights = None` means uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
    dim: usize,
    weights: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "point buffer of length {} is not a non-empty multiple of d = {dim}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("empirical measure point".into()));
        }
        Ok(Self { points, dim, weights: None })
    }

    pub fn weighted(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::uniform(points, dim)?;
        if weights.len() != m.len() {
            return Err(Error::SizeMismatch(format!("{} weights for {} points", weights.len(), m.len())));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights must be non-negative and sum to 1 (sum = {total})")));
        }
        m.weights = Some(weights);
        Ok(m)
    }

    /// Reads a headerless or headed CSV of coordinates, one point per row.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        let mut dim = 0;
        for rec in rdr.records() {
            let rec = rec?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let Ok(row) = parsed else {
                if points.is_empty() {
                    continue; // header line
                }
                return Err(Error::InvalidInput(format!("non-numeric row {:?}", rec)));
            };
            if dim == 0 {
                dim = row.len();
            } else if row.len() != dim {
                return Err(Error::SizeMismatch(format!("row of length {} in a cloud of dimension {dim}", row.len())));
            }
            points.extend(row);
        }
        Self::uniform(points, dim)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.is_none()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    /// Uniform measure on the selected points.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut pts = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            pts.extend_from_slice(self.point(i));
        }
        Self { points: pts, dim: self.dim, weights: None }
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.len() {
            let w = self.weight(i);
            for (mk, x) in m.iter_mut().zip(self.point(i)) {
                *mk += w * x;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransportMethod {
    #[serde(rename = "sorted_1d")]
    Sorted1d,
    #[serde(rename = "exact_assignment")]
    ExactAssignment,
    #[serde(rename = "subsampled")]
    Subsampled,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportResult {
    pub value: f64,
    pub method: TransportMethod,
    /// `matching[i]` is the `ν` index paired with `μ` point `i`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching: Option<Vec<usize>>,
    /// Optimality gap; `Some(0.0)` for exact methods, `None` for estimates.
    pub gap: Option<f64>,
    /// Standard error of a subsampled estimate, 0 otherwise.
    pub stderr: f64,
}

impl TransportResult {
    fn exact(value: f64, method: TransportMethod, matching: Option<Vec<usize>>) -> Self {
        Self { value, method, matching, gap: Some(0.0), stderr: 0.0 }
    }
}

/// Ground cost between two points.
#[derive(Clone, Copy)]
pub enum GroundCost<'a> {
    /// `|x − y|^p`; the reported value is the `p`-th root of the optimal mean.
    Power(f64),
    /// `ρ` or `ρ₁` from a constants pipeline.
    Metric(&'a MetricEvaluator),
}

impl GroundCost<'_> {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            GroundCost::Power(p) => {
                let r = dist(x, y);
                if *p == 1.0 {
                    r
                } else {
                    r.powf(*p)
                }
            }
            GroundCost::Metric(m) => m.eval(x, y),
        }
    }

    fn finish(&self, mean_cost: f64) -> f64 {
        match self {
            GroundCost::Power(p) if *p != 1.0 => mean_cost.max(0.0).powf(1.0 / p),
            _ => mean_cost,
        }
    }
}

/// Size cap and subsampling plan.
#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    pub cap: usize,
    pub subsamples: usize,
    pub subsample_size: usize,
    pub seed: u64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { cap: 1024, subsamples: 32, subsample_size: 512, seed: 0x5eed }
    }
}

fn check_dims(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<()> {
    if mu.dim != nu.dim {
        return Err(Error::SizeMismatch(format!("dimensions {} and {}", mu.dim, nu.dim)));
    }
    Ok(())
}

/// `W1` with default options.
pub fn w1(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<TransportResult> {
    w_cost_with(mu, nu, GroundCost::Power(1.0), &TransportOptions::default())
}

pub fn w_cost(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cost: GroundCost<'_>) -> Result<TransportResult> {
    w_cost_with(mu, nu, cost, &TransportOptions::default())
}

pub fn w_cost_with(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cost: GroundCost<'_>,
    opts: &TransportOptions,
) -> Result<TransportResult> {
    check_dims(mu, nu)?;
    if let GroundCost::Power(p) = cost {
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(format!("power cost needs p ≥ 1, got {p}")));
        }
        if mu.dim == 1 {
            return sorted_1d(mu, nu, p);
        }
    }
    if !(mu.is_uniform() && nu.is_uniform()) {
        return Err(Error::Unsupported("non-uniform weights outside the one-dimensional power-cost path".into()));
    }
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch(format!(
            "exact transport needs equal sizes, got {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    if mu.len() <= opts.cap {
        exact_assignment(mu, nu, cost)
    } else {
        subsampled(mu, nu, cost, opts)
    }
}

/// Exact value by the quantile coupling: `∫₀¹ |F⁻¹(u) − G⁻¹(u)|^p du`.
fn sorted_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: f64) -> Result<TransportResult> {
    let order = |m: &EmpiricalMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.points[a].total_cmp(&m.points[b]));
        idx
    };
    let ix = order(mu);
    let iy = order(nu);
    let pow = |r: f64| if p == 1.0 { r } else { r.powf(p) };

    if mu.is_uniform() && nu.is_uniform() && mu.len() == nu.len() {
        let n = mu.len();
        let mut matching = vec![0; n];
        let mut total = 0.0;
        for (a, b) in ix.iter().zip(&iy) {
            matching[*a] = *b;
            total += pow((mu.points[*a] - nu.points[*b]).abs());
        }
        let mean = total / n as f64;
        let value = if p == 1.0 { mean } else { mean.powf(1.0 / p) };
        return Ok(TransportResult::exact(value, TransportMethod::Sorted1d, Some(matching)));
    }

    let (mut i, mut j) = (0usize, 0usize);
    let (mut left_x, mut left_y) = (mu.weight(ix[0]), nu.weight(iy[0]));
    let mut total = 0.0;
    loop {
        let step = left_x.min(left_y);
        total += step * pow((mu.points[ix[i]] - nu.points[iy[j]]).abs());
        left_x -= step;
        left_y -= step;
        let adv_x = left_x <= 1e-15;
        let adv_y = left_y <= 1e-15;
        if adv_x {
            i += 1;
        }
        if adv_y {
            j += 1;
        }
        if i >= ix.len() || j >= iy.len() {
            break;
        }
        if adv_x {
            left_x = mu.weight(ix[i]);
        }
        if adv_y {
            left_y = nu.weight(iy[j]);
        }
    }
    let value = if p == 1.0 { total } else { total.max(0.0).powf(1.0 / p) };
    Ok(TransportResult::exact(value, TransportMethod::Sorted1d, None))
}

/// Dense cost matrix, rows built in parallel.
pub fn cost_matrix(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cost: GroundCost<'_>) -> Vec<f64> {
    let n = nu.len();
    let mut c = vec![0.0; mu.len() * n];
    c.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        let x = mu.point(i);
        for (j, cij) in row.iter_mut().enumerate() {
            *cij = cost.eval(x, nu.point(j));
        }
    });
    c
}

/// Exact optimal assignment regardless of dimension or size.
pub fn exact_assignment(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cost: GroundCost<'_>) -> Result<TransportResult> {
    check_dims(mu, nu)?;
    if mu.len() != nu.len() || !(mu.is_uniform() && nu.is_uniform()) {
        return Err(Error::SizeMismatch("exact assignment needs equal-size uniform clouds".into()));
    }
    let n = mu.len();
    let c = cost_matrix(mu, nu, cost);
    let sol = assignment::solve(&c, n)?;
    let value = cost.finish(sol.total_cost / n as f64);
    Ok(TransportResult::exact(value, TransportMethod::ExactAssignment, Some(sol.row_to_col)))
}

/// Mean over random subsamples of equal size, with standard error.
///
/// Blocks are disjoint when the clouds hold at least `subsamples ×
/// subsample_size` points; otherwise each block is a fresh random subset.
fn subsampled(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    cost: GroundCost<'_>,
    opts: &TransportOptions,
) -> Result<TransportResult> {
    let n = mu.len();
    let m = opts.subsample_size.min(n);
    let k = opts.subsamples.max(2);
    let mut rng = task_rng(opts.seed, n as u64);
    let mut px: Vec<usize> = (0..n).collect();
    let mut py: Vec<usize> = (0..n).collect();
    let disjoint = k * m <= n;
    if disjoint {
        px.shuffle(&mut rng);
        py.shuffle(&mut rng);
    }
    let mut blocks = Vec::with_capacity(k);
    for b in 0..k {
        let (sx, sy) = if disjoint {
            (px[b * m..(b + 1) * m].to_vec(), py[b * m..(b + 1) * m].to_vec())
        } else {
            px.shuffle(&mut rng);
            py.shuffle(&mut rng);
            (px[..m].to_vec(), py[..m].to_vec())
        };
        blocks.push((sx, sy));
    }
    let values: Vec<f64> = blocks
        .iter()
        .map(|(sx, sy)| exact_assignment(&mu.select(sx), &nu.select(sy), cost).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(TransportResult {
        value: mean,
        method: TransportMethod::Subsampled,
        matching: None,
        gap: None,
        stderr: (var / k as f64).sqrt(),
    })
}

/// Exhaustive minimum over all permutations; refuses `N > 8`.
pub fn brute_force_transport(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, cost: GroundCost<'_>) -> Result<f64> {
    check_dims(mu, nu)?;
    let n = mu.len();
    if n > 8 {
        return Err(Error::Unsupported(format!("brute force limited to N ≤ 8, got {n}")));
    }
    if nu.len() != n || !(mu.is_uniform() && nu.is_uniform()) {
        return Err(Error::SizeMismatch("brute force needs equal-size uniform clouds".into()));
    }
    let c = cost_matrix(mu, nu, cost);
    let mut perm: Vec<usize> = (0..n).collect();
    let eval = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| c[i * n + j]).sum::<f64>();
    let mut best = eval(&perm);
    // Heap's algorithm, iterative form.
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.min(eval(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(cost.finish(best / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(p: &[f64], d: usize) -> EmpiricalMeasure {
        EmpiricalMeasure::uniform(p.to_vec(), d).unwrap()
    }

    #[test]
    fn documented_small_cases() {
        assert_eq!(w1(&cloud(&[0.0, 2.0], 1), &cloud(&[1.0, 3.0], 1)).unwrap().value, 1.0);
        let a = cloud(&[1.0, 0.0, -1.0, 0.0], 2);
        let b = cloud(&[2.0, 0.0, -2.0, 0.0], 2);
        let r = w1(&a, &b).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.method, TransportMethod::ExactAssignment);
        assert_eq!(r.gap, Some(0.0));
        assert_eq!(w1(&a, &a).unwrap().value, 0.0);
        let w2 = w_cost(&cloud(&[0.0], 1), &cloud(&[3.0], 1), GroundCost::Power(2.0)).unwrap();
        assert!((w2.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes_on_the_line() {
        // μ = {0, 1}, ν = {0, 0.5, 1}: quantile coupling moves 1/6 mass by 0.5 twice.
        let r = w1(&cloud(&[0.0, 1.0], 1), &cloud(&[0.0, 0.5, 1.0], 1)).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 1e-15, "{}", r.value);
    }

    #[test]
    fn weighted_line_measures() {
        let mu = EmpiricalMeasure::weighted(vec![0.0, 1.0], 1, vec![0.25, 0.75]).unwrap();
        let nu = cloud(&[1.0], 1);
        assert!((w1(&mu, &nu).unwrap().value - 0.25).abs() < 1e-15);
        assert!(EmpiricalMeasure::weighted(vec![0.0, 1.0], 1, vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn brute_force_refuses_large_inputs() {
        let pts: Vec<f64> = (0..9).map(f64::from).collect();
        assert!(brute_force_transport(&cloud(&pts, 1), &cloud(&pts, 1), GroundCost::Power(1.0)).is_err());
        let one = brute_force_transport(&cloud(&[0.0, 0.0], 2), &cloud(&[3.0, 4.0], 2), GroundCost::Power(1.0));
        assert_eq!(one.unwrap(), 5.0);
    }

    #[test]
    fn mismatched_multid_sizes_error() {
        let a = cloud(&[0.0, 0.0, 1.0, 1.0], 2);
        let b = cloud(&[0.0, 0.0], 2);
        assert!(matches!(w1(&a, &b), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn csv_loading_skips_header() {
        let m = EmpiricalMeasure::from_csv_reader("x0,x1\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!((m.len(), m.dim()), (2, 2));
        assert_eq!(m.point(1), &[3.0, 4.0]);
    }
}
