//! Polar heatmaps: CSV samples and a fixed-size SVG.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use num_complex::Complex64;

const SIZE: f64 = 640.0;
const RADIUS: f64 = 280.0;

// viridis anchors
const COLORS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

/// Samples on the plot layout: ring `i` at radius `(i + 1) / n_r`, sector
/// `k` at angle `2 pi k / n_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    pub n_r: usize,
    pub n_a: usize,
    pub values: Vec<f64>,
}

pub fn plot_points(n_r: usize, n_a: usize) -> Vec<(f64, f64)> {
    (0..n_r)
        .flat_map(|i| {
            (0..n_a).map(move |k| ((i + 1) as f64 / n_r as f64, TAU * k as f64 / n_a as f64))
        })
        .collect()
}

impl PolarField {
    pub fn sample<F>(n_r: usize, n_a: usize, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<f64> + Sync,
    {
        if n_r == 0 || n_a == 0 {
            bail!("plot resolution must be positive");
        }
        let points = plot_points(n_r, n_a);
        let values = qpw_core::par::map(points.len(), |i| {
            let (r, t) = points[i];
            f(Complex64::from_polar(r, t))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_r, n_a, values })
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("r,theta,value\n");
        for ((r, t), v) in plot_points(self.n_r, self.n_a).into_iter().zip(&self.values) {
            writeln!(out, "{r},{t},{v:e}").unwrap();
        }
        out
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn svg(&self, title: &str) -> String {
        let (lo, hi) = self.range();
        let span = hi - lo;
        let c = SIZE / 2.0;
        let dt = TAU / self.n_a as f64;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}">"#,
            h = SIZE + 40.0
        )
        .unwrap();
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        for i in 0..self.n_r {
            let r0 = RADIUS * i as f64 / self.n_r as f64;
            let r1 = RADIUS * (i + 1) as f64 / self.n_r as f64;
            for k in 0..self.n_a {
                let v = self.values[i * self.n_a + k];
                let t = if !v.is_finite() {
                    None
                } else if span > 0.0 {
                    Some((v - lo) / span)
                } else {
                    Some(0.5)
                };
                let fill = t.map_or_else(|| "#ff00ff".to_string(), color);
                // y axis points up
                let a0 = k as f64 * dt - dt / 2.0;
                let a1 = a0 + dt;
                let pt = |r: f64, a: f64| (c + r * a.cos(), c - r * a.sin());
                let (x0, y0) = pt(r1, a0);
                let (x1, y1) = pt(r1, a1);
                let (x2, y2) = pt(r0, a1);
                let (x3, y3) = pt(r0, a0);
                writeln!(
                    out,
                    r#"<path d="M{x0:.3} {y0:.3}A{r1:.3} {r1:.3} 0 0 0 {x1:.3} {y1:.3}L{x2:.3} {y2:.3}A{r0:.3} {r0:.3} 0 0 1 {x3:.3} {y3:.3}Z" fill="{fill}"/>"#
                )
                .unwrap();
            }
        }
        writeln!(
            out,
            r#"<text x="10" y="{y}" font-family="monospace" font-size="14">{} min={lo:.6e} max={hi:.6e}</text>"#,
            escape(title),
            y = SIZE + 25.0
        )
        .unwrap();
        out.push_str("</svg>\n");
        out
    }
}

fn color(t: f64) -> String {
    let x = t.clamp(0.0, 1.0) * (COLORS.len() - 1) as f64;
    let i = (x.floor() as usize).min(COLORS.len() - 2);
    let s = x - i as f64;
    let (a, b) = (COLORS[i], COLORS[i + 1]);
    let mix = |u: f64, v: f64| (u + s * (v - u)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
