//! Coefficient models, assumption bundles and their validation.

mod assumptions;
mod builtin;
mod config;
mod kappa;
mod validate;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assumptions::{AssumptionBundle, AssumptionSummary, Dissipativity, TailBound};
pub use builtin::{builtin_model, Builtin, BuiltinSpec, GaussianLaw, ScaledIdentity};
pub use config::{AssumptionOverrides, ModelConfig};
pub use kappa::{KappaProfile, TailSign};
pub use validate::{validate_bundle, AssumptionCheck, CheckStatus, ProbePlan, ValidationReport};

/// Summaries of the measure argument that a drift reads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFeatures {
    pub mean: bool,
    pub abs_moment: bool,
    pub cloud: bool,
}

impl MeasureFeatures {
    pub const NONE: Self = Self { mean: false, abs_moment: false, cloud: false };
    pub const MEAN: Self = Self { mean: true, abs_moment: false, cloud: false };
}

/// Borrowed view of an empirical law `(1/N) Σ δ_{x_i}` plus precomputed summaries.
#[derive(Clone, Copy)]
pub struct LawView<'a> {
    pub dim: usize,
    /// Row-major `N × d` points.
    pub points: &'a [f64],
    /// Mean vector; empty when the drift does not read it.
    pub mean: &'a [f64],
    /// First absolute moment `∫|x| dμ`; NaN when not requested.
    pub abs_moment: f64,
}

impl<'a> LawView<'a> {
    pub fn len(&self) -> usize {
        self.points.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Owned summaries backing a [`LawView`].
#[derive(Clone, Debug, Default)]
pub struct LawSummary {
    pub mean: Vec<f64>,
    pub abs_moment: f64,
}

impl LawSummary {
    /// Sequential reduction so that the result is independent of thread count.
    pub fn compute(points: &[f64], dim: usize, features: MeasureFeatures) -> Self {
        let n = points.len() / dim;
        let mut mean = Vec::new();
        if features.mean {
            mean = vec![0.0; dim];
            for p in points.chunks_exact(dim) {
                for (m, x) in mean.iter_mut().zip(p) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= n as f64;
            }
        }
        let abs_moment = if features.abs_moment {
            points.chunks_exact(dim).map(crate::linalg::norm).sum::<f64>() / n as f64
        } else {
            f64::NAN
        };
        Self { mean, abs_moment }
    }

    pub fn view<'a>(&'a self, points: &'a [f64], dim: usize) -> LawView<'a> {
        LawView { dim, points, mean: &self.mean, abs_moment: self.abs_moment }
    }
}

/// Drift `b(x, μ)`. Implementations must be deterministic and thread-safe.
pub trait Drift: Send + Sync {
    fn eval(&self, x: &[f64], law: &LawView<'_>, out: &mut [f64]);
}

impl<F> Drift for F
where
    F: Fn(&[f64], &LawView<'_>, &mut [f64]) + Send + Sync,
{
    fn eval(&self, x: &[f64], law: &LawView<'_>, out: &mut [f64]) {
        self(x, law, out)
    }
}

/// Diffusion `σ(x)`, a `d × d` matrix.
pub trait Diffusion: Send + Sync {
    fn eval(&self, x: &[f64], out: &mut DMatrix<f64>);

    /// Writes `σ(x)⁻¹` into `out` and returns `true` if a closed form exists.
    fn inverse(&self, _x: &[f64], _out: &mut DMatrix<f64>) -> bool {
        false
    }

    /// `true` when `σ` does not depend on `x`.
    fn is_constant(&self) -> bool {
        false
    }
}

impl<F> Diffusion for F
where
    F: Fn(&[f64], &mut DMatrix<f64>) + Send + Sync,
{
    fn eval(&self, x: &[f64], out: &mut DMatrix<f64>) {
        self(x, out)
    }
}

/// A McKean–Vlasov model `dX = b(X, μ) dt + σ(X) dW`.
#[derive(Clone)]
pub struct CoefficientModel {
    dim: usize,
    name: String,
    drift: Arc<dyn Drift>,
    diffusion: Arc<dyn Diffusion>,
    features: MeasureFeatures,
}

impl fmt::Debug for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("features", &self.features)
            .finish()
    }
}

impl CoefficientModel {
    pub fn new(
        dim: usize,
        drift: impl Drift + 'static,
        diffusion: impl Diffusion + 'static,
        features: MeasureFeatures,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            name: "custom".into(),
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            features,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> MeasureFeatures {
        self.features
    }

    pub fn diffusion_is_constant(&self) -> bool {
        self.diffusion.is_constant()
    }

    pub fn summarize(&self, points: &[f64]) -> LawSummary {
        LawSummary::compute(points, self.dim, self.features)
    }

    pub fn drift(&self, x: &[f64], law: &LawView<'_>, out: &mut [f64]) {
        self.drift.eval(x, law, out)
    }

    pub fn sigma(&self, x: &[f64], out: &mut DMatrix<f64>) {
        self.diffusion.eval(x, out)
    }

    pub fn sigma_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.sigma(x, &mut m);
        m
    }

    /// `σ(x)⁻¹`, from the closed form if available and by LU otherwise.
    /// `sigma` must already hold `σ(x)`.
    pub fn sigma_inverse(&self, x: &[f64], sigma: &DMatrix<f64>, out: &mut DMatrix<f64>) -> Result<()> {
        if self.diffusion.inverse(x, out) {
            return Ok(());
        }
        out.copy_from(sigma);
        if self.dim == 1 {
            let v = sigma[(0, 0)];
            if v == 0.0 || !v.is_finite() {
                return Err(Error::SingularDiffusion(x.to_vec()));
            }
            out[(0, 0)] = 1.0 / v;
            return Ok(());
        }
        if !out.try_inverse_mut() {
            return Err(Error::SingularDiffusion(x.to_vec()));
        }
        Ok(())
    }

    /// `b(0, δ₀)`.
    pub fn drift_at_origin(&self) -> Vec<f64> {
        let zero = vec![0.0; self.dim];
        let summary = self.summarize(&zero);
        let mut out = vec![0.0; self.dim];
        self.drift(&zero, &summary.view(&zero, self.dim), &mut out);
        out
    }
}
