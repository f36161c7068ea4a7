use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Sign of `limsup_{r→∞} κ(r)` as declared by the user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSign {
    Negative,
    NonNegative,
    Unknown,
}

/// The one-sided Lipschitz profile `κ`, clipped from below at `−κ_max`.
#[derive(Clone)]
pub struct KappaProfile {
    raw: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    kappa_max: f64,
    tail: TailSign,
}

impl fmt::Debug for KappaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KappaProfile")
            .field("kappa_max", &self.kappa_max)
            .field("tail", &self.tail)
            .finish()
    }
}

impl KappaProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, kappa_max: f64, tail: TailSign) -> Self {
        Self { raw: Arc::new(f), kappa_max, tail }
    }

    pub fn constant(k: f64) -> Self {
        let tail = if k < 0.0 { TailSign::Negative } else { TailSign::NonNegative };
        Self::new(move |_| k, k.abs(), tail)
    }

    /// `max(κ(r), −κ_max)`. Clipping from below keeps the inequality valid.
    pub fn eval(&self, r: f64) -> f64 {
        (self.raw)(r).max(-self.kappa_max)
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn tail(&self) -> TailSign {
        self.tail
    }

    /// `sup_{[0, r]} |κ|`, sampled on a dense grid.
    pub fn sup_abs_on(&self, r: f64) -> f64 {
        const N: usize = 4000;
        (0..=N)
            .map(|i| self.eval(r * i as f64 / N as f64).abs())
            .fold(0.0, f64::max)
    }
}
