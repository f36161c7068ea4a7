use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{
    AssumptionBundle, CoefficientModel, Diffusion, Dissipativity, KappaProfile, LawView,
    MeasureFeatures, TailBound, TailSign,
};
use crate::error::{Error, Result};

/// `σ(x) = s I`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledIdentity {
    pub dim: usize,
    pub scale: f64,
}

impl Diffusion for ScaledIdentity {
    fn eval(&self, _x: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        out.fill_diagonal(self.scale);
    }

    fn inverse(&self, _x: &[f64], out: &mut DMatrix<f64>) -> bool {
        out.fill(0.0);
        out.fill_diagonal(1.0 / self.scale);
        true
    }

    fn is_constant(&self) -> bool {
        true
    }
}

fn one() -> f64 {
    1.0
}

fn one_dim() -> usize {
    1
}

/// Built-in models selectable by name from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BuiltinSpec {
    /// `b = −θx + L1·mean(μ)`, `σ = s I`.
    MeanFieldOu {
        #[serde(default = "one_dim")]
        dim: usize,
        l1: f64,
        #[serde(default = "one")]
        theta: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// One-dimensional `b = x − x³ + L1·mean(μ)`, `σ = s`.
    DoubleWellAttraction {
        #[serde(default)]
        l1: f64,
        kappa_max: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    /// `b = −θx + a sin(ωx) + L1·mean(μ)` componentwise, `σ = s I`,
    /// with `κ(r) = −θ + a min(ω, 2√d / r)`.
    ConstDiffusionCustomKappa {
        #[serde(default = "one_dim")]
        dim: usize,
        theta: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        l1: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
}

/// Gaussian `N(mean·1, variance·I)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    pub mean: f64,
    pub variance: f64,
}

/// A built-in model with its assumption constants.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub model: CoefficientModel,
    pub assumptions: AssumptionBundle,
    /// Invariant law, when known in closed form.
    pub stationary: Option<GaussianLaw>,
}

/// Looks up a built-in by name with JSON parameters.
pub fn builtin_model(name: &str, params: &serde_json::Value) -> Result<Builtin> {
    const NAMES: [&str; 3] = ["mean_field_ou", "double_well_attraction", "const_diffusion_custom_kappa"];
    if !NAMES.contains(&name) {
        return Err(Error::UnknownModel(name.to_string()));
    }
    let mut obj = match params {
        serde_json::Value::Object(m) => m.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        _ => return Err(Error::InvalidInput("model parameters must be a JSON object".into())),
    };
    obj.insert("name".into(), serde_json::Value::String(name.into()));
    let spec: BuiltinSpec = serde_json::from_value(serde_json::Value::Object(obj))?;
    spec.build()
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg.into()))
    }
}

impl BuiltinSpec {
    pub fn mean_field_ou(dim: usize, l1: f64) -> Self {
        Self::MeanFieldOu { dim, l1, theta: 1.0, sigma: 1.0 }
    }

    pub fn build(&self) -> Result<Builtin> {
        match *self {
            Self::MeanFieldOu { dim, l1, theta, sigma } => mean_field_ou(dim, l1, theta, sigma),
            Self::DoubleWellAttraction { l1, kappa_max, sigma } => double_well(l1, kappa_max, sigma),
            Self::ConstDiffusionCustomKappa { dim, theta, amp, freq, l1, sigma } => {
                custom_kappa(dim, theta, amp, freq, l1, sigma)
            }
        }
    }
}

fn mean_field_ou(dim: usize, l1: f64, theta: f64, sigma: f64) -> Result<Builtin> {
    require(dim >= 1, "dim must be positive")?;
    require(l1 >= 0.0 && l1.is_finite(), "l1 must be finite and non-negative")?;
    require(theta > 0.0 && theta.is_finite(), "theta must be positive")?;
    require(sigma > 0.0 && sigma.is_finite(), "sigma must be positive")?;
    let drift = move |x: &[f64], law: &LawView<'_>, out: &mut [f64]| {
        for k in 0..x.len() {
            out[k] = -theta * x[k] + l1 * law.mean[k];
        }
    };
    let model = CoefficientModel::new(dim, drift, ScaledIdentity { dim, scale: sigma }, MeasureFeatures::MEAN)?
        .with_name("mean_field_ou");
    let tail = (theta > l1).then_some(TailBound { r0: 1.0, k: theta - l1 });
    let assumptions = AssumptionBundle {
        kappa: KappaProfile::constant(-theta),
        l1,
        l2: 0.0,
        l3: l1.max(1.0),
        m: 0.0,
        lambda_inv: 1.0 / sigma,
        sigma_trace_sup: dim as f64 * sigma * sigma,
        sigma_at_zero_norm: sigma,
        dissipativity: Some(Dissipativity { lambda: theta, l4: l1, radius: 1.0 }),
        kappa_tail_negative: tail,
    };
    let stationary = (theta > l1).then(|| GaussianLaw { mean: 0.0, variance: sigma * sigma / (2.0 * theta) });
    Ok(Builtin { model, assumptions, stationary })
}

fn double_well(l1: f64, kappa_max: f64, sigma: f64) -> Result<Builtin> {
    require(l1 >= 0.0 && l1.is_finite(), "l1 must be finite and non-negative")?;
    require(kappa_max >= 1.0 && kappa_max.is_finite(), "kappa_max must be at least κ(0) = 1")?;
    require(sigma > 0.0 && sigma.is_finite(), "sigma must be positive")?;
    let drift = move |x: &[f64], law: &LawView<'_>, out: &mut [f64]| {
        out[0] = x[0] - x[0] * x[0] * x[0] + l1 * law.mean[0];
    };
    let model = CoefficientModel::new(1, drift, ScaledIdentity { dim: 1, scale: sigma }, MeasureFeatures::MEAN)?
        .with_name("double_well_attraction");
    // 1 − r²/4 ≤ −(L1 + K) once r ≥ 2√(1 + L1 + K); the clip needs κ_max ≥ L1 + K.
    let tail = (kappa_max > l1).then(|| {
        let k = 0.5 * (kappa_max - l1);
        TailBound { r0: 2.0 * (1.0 + l1 + k).sqrt(), k }
    });
    let assumptions = AssumptionBundle {
        kappa: KappaProfile::new(|r| 1.0 - 0.25 * r * r, kappa_max, TailSign::Negative),
        l1,
        l2: 0.0,
        l3: l1.max(1.0),
        m: 0.0,
        lambda_inv: 1.0 / sigma,
        sigma_trace_sup: sigma * sigma,
        sigma_at_zero_norm: sigma,
        // x² − x⁴ ≤ −x² once x² ≥ 2.
        dissipativity: Some(Dissipativity { lambda: 1.0, l4: l1, radius: std::f64::consts::SQRT_2 }),
        kappa_tail_negative: tail,
    };
    Ok(Builtin { model, assumptions, stationary: None })
}

fn custom_kappa(dim: usize, theta: f64, amp: f64, freq: f64, l1: f64, sigma: f64) -> Result<Builtin> {
    require(dim >= 1, "dim must be positive")?;
    require(theta > 0.0 && theta.is_finite(), "theta must be positive")?;
    require(amp >= 0.0 && amp.is_finite(), "amp must be non-negative")?;
    require(freq >= 0.0 && freq.is_finite(), "freq must be non-negative")?;
    require(l1 >= 0.0 && l1.is_finite(), "l1 must be finite and non-negative")?;
    require(sigma > 0.0 && sigma.is_finite(), "sigma must be positive")?;
    let drift = move |x: &[f64], law: &LawView<'_>, out: &mut [f64]| {
        for k in 0..x.len() {
            out[k] = -theta * x[k] + amp * (freq * x[k]).sin() + l1 * law.mean[k];
        }
    };
    let model = CoefficientModel::new(dim, drift, ScaledIdentity { dim, scale: sigma }, MeasureFeatures::MEAN)?
        .with_name("const_diffusion_custom_kappa");
    let sqrt_d = (dim as f64).sqrt();
    // Σ|z_i| |sin ωx_i − sin ωy_i| ≤ min(ω|z|², 2√d |z|).
    let kappa = move |r: f64| {
        let slope = if r > 0.0 { freq.min(2.0 * sqrt_d / r) } else { freq };
        -theta + amp * slope
    };
    let kappa_max = theta.max((amp * freq - theta).abs());
    // a√d|x| ≤ (θ/2)|x|² once |x| ≥ 2a√d/θ.
    let radius = if amp > 0.0 { 2.0 * amp * sqrt_d / theta } else { 1.0 };
    let tail = (theta > l1).then(|| {
        let k = 0.5 * (theta - l1);
        let r0 = if amp > 0.0 { 4.0 * amp * sqrt_d / (theta - l1) } else { 1.0 };
        TailBound { r0, k }
    });
    let assumptions = AssumptionBundle {
        kappa: KappaProfile::new(kappa, kappa_max, TailSign::Negative),
        l1,
        l2: 0.0,
        l3: l1.max(1.0),
        m: 0.0,
        lambda_inv: 1.0 / sigma,
        sigma_trace_sup: dim as f64 * sigma * sigma,
        sigma_at_zero_norm: sigma,
        dissipativity: Some(Dissipativity { lambda: 0.5 * theta, l4: l1, radius }),
        kappa_tail_negative: tail,
    };
    Ok(Builtin { model, assumptions, stationary: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_rejected() {
        let err = builtin_model("harmonic_trap", &serde_json::json!({})).unwrap_err();
        assert!(matches!(err, Error::UnknownModel(_)));
    }

    #[test]
    fn mean_field_ou_constants() {
        let b = builtin_model("mean_field_ou", &serde_json::json!({"dim": 1, "l1": 0.1})).unwrap();
        let a = &b.assumptions;
        assert_eq!(a.kappa.eval(3.0), -1.0);
        assert_eq!((a.l2, a.m, a.lambda_inv), (0.0, 0.0, 1.0));
        let diss = a.dissipativity.unwrap();
        assert_eq!((diss.lambda, diss.l4), (1.0, 0.1));
        let tail = a.kappa_tail_negative.unwrap();
        assert!((tail.k - 0.9).abs() < 1e-15);
        assert_eq!(b.stationary.unwrap().variance, 0.5);
    }

    #[test]
    fn double_well_kappa_clips() {
        let b = builtin_model("double_well_attraction", &serde_json::json!({"kappa_max": 10.0})).unwrap();
        assert_eq!(b.assumptions.kappa.eval(8.0), -10.0);
        let mut out = [0.0];
        let pts = [0.0];
        let summary = b.model.summarize(&pts);
        b.model.drift(&[2.0], &summary.view(&pts, 1), &mut out);
        assert_eq!(out[0], 2.0 - 8.0);
    }

    #[test]
    fn tail_declaration_holds_beyond_r0() {
        for spec in [
            BuiltinSpec::DoubleWellAttraction { l1: 0.3, kappa_max: 5.0, sigma: 1.0 },
            BuiltinSpec::ConstDiffusionCustomKappa { dim: 2, theta: 1.5, amp: 0.5, freq: 3.0, l1: 0.2, sigma: 1.0 },
        ] {
            let b = spec.build().unwrap();
            let t = b.assumptions.kappa_tail_negative.unwrap();
            for i in 1..2000 {
                let r = t.r0 + 0.01 * i as f64;
                assert!(b.assumptions.l1 + b.assumptions.kappa.eval(r) <= -t.k + 1e-12, "{spec:?} r={r}");
            }
        }
    }
}
