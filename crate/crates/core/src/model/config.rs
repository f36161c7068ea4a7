use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Builtin, BuiltinSpec, Dissipativity, TailBound};
use crate::error::Result;

/// Optional replacements for the constants shipped with a built-in.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionOverrides {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub l3: Option<f64>,
    pub m: Option<f64>,
    pub lambda_inv: Option<f64>,
    pub sigma_trace_sup: Option<f64>,
    pub sigma_at_zero_norm: Option<f64>,
    pub dissipativity: Option<Dissipativity>,
    pub kappa_tail_negative: Option<TailBound>,
}

/// JSON model configuration: a built-in selected by name plus overrides.
///
/// ```json
/// { "model": { "name": "mean_field_ou", "dim": 1, "l1": 0.1 },
///   "overrides": { "sigma_trace_sup": 1.0 } }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: BuiltinSpec,
    #[serde(default)]
    pub overrides: AssumptionOverrides,
}

impl ModelConfig {
    pub fn new(model: BuiltinSpec) -> Self {
        Self { model, overrides: AssumptionOverrides::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<Builtin> {
        let mut b = self.model.build()?;
        let o = &self.overrides;
        let a = &mut b.assumptions;
        if let Some(v) = o.l1 {
            a.l1 = v;
        }
        if let Some(v) = o.l2 {
            a.l2 = v;
        }
        if let Some(v) = o.l3 {
            a.l3 = v;
        }
        if let Some(v) = o.m {
            a.m = v;
        }
        if let Some(v) = o.lambda_inv {
            a.lambda_inv = v;
        }
        if let Some(v) = o.sigma_trace_sup {
            a.sigma_trace_sup = v;
        }
        if let Some(v) = o.sigma_at_zero_norm {
            a.sigma_at_zero_norm = v;
        }
        if o.dissipativity.is_some() {
            a.dissipativity = o.dissipativity;
        }
        if o.kappa_tail_negative.is_some() {
            a.kappa_tail_negative = o.kappa_tail_negative;
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_overrides() {
        let cfg = ModelConfig::from_json(
            r#"{"model": {"name": "mean_field_ou", "l1": 0.1},
                "overrides": {"kappa_tail_negative": {"r0": 2.0, "k": 0.5}}}"#,
        )
        .unwrap();
        let b = cfg.build().unwrap();
        assert_eq!(b.model.dim(), 1);
        assert_eq!(b.assumptions.kappa_tail_negative, Some(TailBound { r0: 2.0, k: 0.5 }));
    }

    #[test]
    fn rejects_unknown_override_keys() {
        let r = ModelConfig::from_json(r#"{"model": {"name": "mean_field_ou", "l1": 0.1}, "overrides": {"l9": 1}}"#);
        assert!(r.is_err());
    }
}
