//! Numerical toolkit for McKean–Vlasov SDEs with multiplicative noise.
//!
//! The crate computes explicit Wasserstein contraction constants from
//! user-supplied coefficients, simulates interacting particle systems and the
//! mixed reflection/synchronous coupling, measures empirical transport
//! distances, and runs Monte Carlo experiments that check the resulting bounds.
//!
//! Modules, bottom-up:
//!
//! - [`model`]: coefficient models, assumption bundles, validation, built-ins.
//! - [`constants`]: the two constant pipelines and the metrics they induce.
//! - [`simulate`]: Euler–Maruyama stepping of particle systems and couplings.
//! - [`transport`]: exact and subsampled optimal transport on point clouds.
//! - [`experiments`]: contraction, chaos, ergodicity and moment experiments.
//!
//! Each capability has a runnable example under `crates/core/examples/`, e.g.
//! `cargo run --release -p mckean --example constants_report`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod transport;

pub use error::{Error, Result};
