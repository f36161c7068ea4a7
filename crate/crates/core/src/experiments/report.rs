use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{ChaosReport, ContractionReport, ErgodicReport, MomentReport};
use crate::error::Result;

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

/// One named polyline.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), points }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Standalone SVG with one polyline per series. Non-positive values are
/// dropped on log axes.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool, log_y: bool) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 440.0, 70.0, 170.0, 40.0, 50.0);
    let tx = |v: f64| if log_x { v.ln() } else { v };
    let ty = |v: f64| if log_y { v.ln() } else { v };
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0);
    let pts: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter(|p| keep(p)).map(|&(x, y)| (tx(x), ty(y))).collect()).collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;
    let label = |v: f64, log: bool| if log { format!("{:.3e}", v.exp()) } else { format!("{v:.3}") };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(fx), h - bottom + 18.0, label(fx, log_x));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, sy(fy) + 4.0, label(fy, log_y));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, path.join(" "));
        let ly = top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - right + 10.0, w - right + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - right + 36.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl ContractionReport {
    pub fn svg(&self) -> String {
        let r = &self.records;
        let mut series = vec![
            Series::new("W1", r.iter().map(|x| (x.t, x.w1)).collect()),
            Series::new("noise floor", r.iter().map(|x| (x.t, x.noise_floor)).collect()),
        ];
        if r.iter().any(|x| x.bound.is_some()) {
            series.push(Series::new("bound", r.iter().filter_map(|x| Some((x.t, x.bound?))).collect()));
        }
        if r.iter().any(|x| x.w_rho.is_some()) {
            series.push(Series::new("W_rho", r.iter().filter_map(|x| Some((x.t, x.w_rho?))).collect()));
        }
        if r.iter().any(|x| x.w_rho1.is_some()) {
            series.push(Series::new("W_rho1", r.iter().filter_map(|x| Some((x.t, x.w_rho1?))).collect()));
        }
        svg_line_plot("Coupled contraction", "t", "distance", &series, false, true)
    }
}

impl ChaosReport {
    pub fn svg(&self) -> String {
        let r = &self.rows;
        let mut series = vec![
            Series::new("W1", r.iter().map(|x| (x.n as f64, x.w1)).collect()),
            Series::new("W_rho", r.iter().map(|x| (x.n as f64, x.w_rho)).collect()),
        ];
        if self.fit_c.is_some() {
            series.push(Series::new("bound", r.iter().filter_map(|x| Some((x.n as f64, x.bound?))).collect()));
        }
        svg_line_plot("Propagation of chaos", "n", "distance at T", &series, true, true)
    }
}

impl ErgodicReport {
    pub fn svg(&self) -> String {
        let r = &self.records;
        let series = vec![
            Series::new("|mean|", r.iter().map(|x| (x.t, x.mean_norm)).collect()),
            Series::new("variance", r.iter().map(|x| (x.t, x.variance)).collect()),
        ];
        svg_line_plot("Convergence to equilibrium", "t", "moment", &series, false, false)
    }
}

impl MomentReport {
    pub fn svg(&self) -> String {
        let r = &self.records;
        let series = vec![
            Series::new("E|X_t|", r.iter().map(|x| (x.t, x.mean_abs)).collect()),
            Series::new("ceiling", r.iter().map(|x| (x.t, self.ceiling.ceiling)).collect()),
        ];
        svg_line_plot("First moment from the origin", "t", "E|X_t|", &series, false, false)
    }
}
