//! Euler–Maruyama stepping of particle systems and of the mixed
//! reflection/synchronous coupling.
//!
//! Noise is drawn from counter-based streams (see [`crate::rng`]), so a run is
//! bitwise reproducible from its seed at any worker count.

mod coupling;
mod ensemble;
mod io;
mod radial;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{mat_vec, norm};

pub use coupling::{CoupledEnsemble, CouplingMode, LawProxy, PairDiagnostics};
pub use ensemble::{InitialLaw, ParticleEnsemble, Snapshot, StepPlan, Trajectory};
pub use io::{read_binary, write_binary, write_csv};
pub use radial::{lyapunov_trace, radial_diagnostics, radial_terms, LyapunovPoint, LyapunovTrace, RadialTerms};

/// `rc = clamp((r − δ/2)/(δ/2), 0, 1)`, `sc = √(1 − rc²)`.
pub fn transition_rc_sc(r: f64, delta: f64) -> (f64, f64) {
    let half = 0.5 * delta;
    let rc = ((r - half) / half).clamp(0.0, 1.0);
    (rc, (1.0 - rc * rc).sqrt())
}

/// Unit vector `σ_y⁻¹ z / |σ_y⁻¹ z|`, or `e₁` when `z = 0`.
pub(crate) fn reflection_axis(sigma_y_inv: &DMatrix<f64>, z: &[f64], out: &mut [f64]) {
    mat_vec(sigma_y_inv, z, out);
    let n = norm(out);
    if n > 0.0 && n.is_finite() {
        for v in out.iter_mut() {
            *v /= n;
        }
    } else {
        out.fill(0.0);
        out[0] = 1.0;
    }
}

/// `H = I − 2uuᵀ` with `u = σ_y⁻¹ z / |σ_y⁻¹ z|`.
pub fn reflection_matrix(sigma_y: &DMatrix<f64>, z: &[f64]) -> Result<DMatrix<f64>> {
    let d = z.len();
    if sigma_y.nrows() != d || sigma_y.ncols() != d {
        return Err(Error::SizeMismatch(format!("σ_y is {}×{}, z has length {d}", sigma_y.nrows(), sigma_y.ncols())));
    }
    if norm(z) == 0.0 {
        return Err(Error::InvalidInput("reflection needs z ≠ 0".into()));
    }
    let inv = sigma_y
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularDiffusion(Vec::new()))?;
    let mut u = vec![0.0; d];
    reflection_axis(&inv, z, &mut u);
    let mut h = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] -= 2.0 * u[i] * u[j];
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

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
}
