//! Tabulation of `h`, `Φ = ∫e^{−h}`, `I = ∫Φe^{h}` and `P = ∫e^{−h}I`.
//!
//! `e^{h}` overflows for moderate radii in pipeline 2, so `I` is carried as
//! `Ĩ = e^{−h} I`, which stays bounded because `h` is nondecreasing:
//!
//! `Ĩ(s) = e^{h(a) − h(s)} Ĩ(a) + ∫_a^s Φ(u) e^{h(u) − h(s)} du`,
//!
//! and `ln I = h + ln Ĩ`. Inside each cell every quantity is evaluated from the
//! left node by nested adaptive Simpson.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

pub(crate) struct Profile {
    pub r: Vec<f64>,
    pub h: Vec<f64>,
    pub big_phi: Vec<f64>,
    pub i_scaled: Vec<f64>,
    pub p: Vec<f64>,
}

impl Profile {
    pub fn phi(&self, i: usize) -> f64 {
        (-self.h[i]).exp()
    }

    /// `ln I(r_i)`, `−∞` at the origin.
    pub fn ln_i(&self, i: usize) -> f64 {
        self.h[i] + self.i_scaled[i].ln()
    }

    pub fn index_of(&self, r: f64) -> usize {
        self.r
            .iter()
            .position(|&x| x == r)
            .expect("breakpoint is a tabulation node")
    }
}

/// Nodes on `[0, breaks.last()]` with every breakpoint included; cells are
/// shared among segments in proportion to their length.
pub(crate) fn build_nodes(breaks: &[f64], total: usize) -> Vec<f64> {
    let end = *breaks.last().expect("non-empty breakpoints");
    let cells = total.saturating_sub(1).max(breaks.len());
    let mut nodes = vec![0.0];
    let mut prev = 0.0;
    for &b in breaks {
        if b <= prev {
            continue;
        }
        let k = ((cells as f64 * (b - prev) / end).round() as usize).max(1);
        for j in 1..k {
            nodes.push(prev + (b - prev) * j as f64 / k as f64);
        }
        nodes.push(b);
        prev = b;
    }
    nodes
}

pub(crate) fn build_profile(rate: &dyn Fn(f64) -> f64, nodes: Vec<f64>, quad_tol: f64) -> Result<Profile> {
    let n = nodes.len();
    let total = *nodes.last().unwrap();
    let mut h = vec![0.0; n];
    let mut big_phi = vec![0.0; n];
    let mut i_scaled = vec![0.0; n];
    let mut p = vec![0.0; n];

    for i in 0..n - 1 {
        let a = nodes[i];
        let b = nodes[i + 1];
        let tol = (quad_tol * (b - a) / total).max(1e-300);
        let (h0, phi0, it0, p0) = (h[i], big_phi[i], i_scaled[i], p[i]);
        let nan_on_err = |r: Result<f64>| r.unwrap_or(f64::NAN);

        let h_at = |s: f64| h0 + nan_on_err(adaptive_simpson(rate, a, s, tol));
        let phi_at = |s: f64| phi0 + nan_on_err(adaptive_simpson(|u| (-h_at(u)).exp(), a, s, tol));
        let it_at = |s: f64| {
            let hs = h_at(s);
            (h0 - hs).exp() * it0 + nan_on_err(adaptive_simpson(|u| phi_at(u) * (h_at(u) - hs).exp(), a, s, tol))
        };

        h[i + 1] = h_at(b);
        big_phi[i + 1] = phi_at(b);
        i_scaled[i + 1] = it_at(b);
        p[i + 1] = p0 + adaptive_simpson(it_at, a, b, tol)?;
        if !(h[i + 1].is_finite() && big_phi[i + 1].is_finite() && i_scaled[i + 1].is_finite()) {
            if !h[i + 1].is_finite() {
                return Err(Error::NonFinite(format!("h on [{a}, {b}]")));
            }
            return Err(Error::Quadrature { a, b });
        }
    }
    Ok(Profile { r: nodes, h, big_phi, i_scaled, p })
}

/// Tabulated `(r, φ, Φ, g, f, f′)` rows for reports.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Tabulation {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub big_phi: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
}

impl Tabulation {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "phi", "Phi", "g", "f", "f_prime"])?;
        for i in 0..self.len() {
            out.write_record(
                [self.r[i], self.phi[i], self.big_phi[i], self.g[i], self.f[i], self.df[i]].map(|v| format!("{v:.17e}")),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_include_breakpoints() {
        let nodes = build_nodes(&[1.0, 2.5615528128088303], 4096);
        assert_eq!(nodes.len(), 4096);
        assert!(nodes.contains(&1.0));
        assert_eq!(*nodes.last().unwrap(), 2.5615528128088303);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_rate_closed_forms() {
        // h = 4r ⇒ Φ = (1 − e^{−4r})/4, I = ∫(e^{4s} − 1)/4 ds.
        let prof = build_profile(&|_| 4.0, build_nodes(&[4.0], 2048), 1e-10).unwrap();
        let last = prof.r.len() - 1;
        let phi_closed = (1.0 - (-16f64).exp()) / 4.0;
        assert!((prof.big_phi[last] - phi_closed).abs() < 1e-12);
        let i_closed = ((16f64).exp() - 1.0) / 16.0 - 1.0;
        assert!((prof.ln_i(last).exp() / i_closed - 1.0).abs() < 1e-9);
    }
}
