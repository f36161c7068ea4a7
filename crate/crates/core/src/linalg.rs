//! Small dense helpers on flat slices and `nalgebra` matrices.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `out = m * v`.
pub fn mat_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (i, o) in out.iter_mut().enumerate().take(d) {
        let mut s = 0.0;
        for (j, vj) in v.iter().enumerate() {
            s += m[(i, j)] * vj;
        }
        *o = s;
    }
}

/// `out = mᵀ v`.
pub fn mat_t_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for (j, o) in out.iter_mut().enumerate().take(d) {
        let mut s = 0.0;
        for (i, vi) in v.iter().enumerate() {
            s += m[(i, j)] * vi;
        }
        *o = s;
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 if m.ncols() == 1 => m[(0, 0)].abs(),
        2 if m.ncols() == 2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let fro = a * a + b * b + c * c + d * d;
            let det = a * d - b * c;
            let disc = (fro * fro - 4.0 * det * det).max(0.0).sqrt();
            (0.5 * (fro + disc)).sqrt()
        }
        _ => m
            .singular_values()
            .iter()
            .fold(0.0f64, |acc, s| acc.max(*s)),
    }
}

/// Frobenius norm squared, i.e. `tr(m mᵀ)`.
pub fn trace_mmt(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

pub fn max_abs_identity_defect(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -3.0, 2.0]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_closed_form_matches_svd() {
        let m = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 2.5, 0.7]);
        let svd = m.singular_values().max();
        assert!((spectral_norm(&m) - svd).abs() < 1e-12);
    }

    #[test]
    fn transpose_product_matches_nalgebra() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let mut out = [0.0; 2];
        mat_t_vec(&m, &[1.0, -1.0], &mut out);
        assert_eq!(out, [-2.0, -2.0]);
        mat_vec(&m, &[1.0, -1.0], &mut out);
        assert_eq!(out, [-1.0, -1.0]);
    }
}
