//! Minimal SVG line charts with error bars.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ComplexitySweep, SweepReport};
use crate::error::Result;
use crate::models::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Half-length of the error bar.
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

impl LineChart {
    pub fn is_empty(&self) -> bool {
        self.series.iter().all(|s| s.points.is_empty())
    }

    /// Linear axes; one `<polyline>` per series.
    pub fn to_svg(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = range(pts().map(|p| p.x));
        let (y0, y1) = range(pts().flat_map(|p| [p.y - p.err, p.y + p.err]));
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>"#);
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(xv));
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, fmt_tick(yv));
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let c = COLORS[i % COLORS.len()];
            let line: Vec<String> = series.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, line.join(" "));
            for p in &series.points {
                let (px, lo, hi) = (sx(p.x), sy(p.y - p.err), sy(p.y + p.err));
                let _ = writeln!(
                    s,
                    r#"<g stroke="{c}"><line x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}"/><line x1="{:.2}" y1="{lo:.2}" x2="{:.2}" y2="{lo:.2}"/><line x1="{:.2}" y1="{hi:.2}" x2="{:.2}" y2="{hi:.2}"/></g>"#,
                    px - 4.0,
                    px + 4.0,
                    px - 4.0,
                    px + 4.0
                );
                let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, sy(p.y));
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = W - RIGHT + 12.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.name));
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_svg())?;
        Ok(())
    }
}

fn series_from(map: BTreeMap<ModelKind, Vec<Point>>) -> Vec<Series> {
    map.into_iter()
        .map(|(kind, mut points)| {
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series { name: kind.to_string(), points }
        })
        .collect()
}

/// Test error against `n`, one chart per `(k, d)`.
pub fn sweep_charts(report: &SweepReport) -> Vec<(String, LineChart)> {
    let mut by_shape: BTreeMap<(usize, usize), BTreeMap<ModelKind, Vec<Point>>> = BTreeMap::new();
    for c in &report.cells {
        by_shape.entry((c.k, c.d)).or_default().entry(c.kind).or_default().push(Point { x: c.n as f64, y: c.mean, err: c.std });
    }
    by_shape
        .into_iter()
        .map(|((k, d), m)| {
            (
                format!("test_error_k{k}_d{d}.svg"),
                LineChart {
                    title: format!("Test error, k = {k}, d = {d}"),
                    x_label: "training samples n".into(),
                    y_label: "test error".into(),
                    series: series_from(m),
                },
            )
        })
        .collect()
}

/// Sample complexity against `k` for every `d` with at least two `k` values,
/// and against `d` for every `k` with at least two `d` values.
pub fn complexity_charts(sweep: &ComplexitySweep) -> Vec<(String, LineChart)> {
    let mut vs_k: BTreeMap<usize, BTreeMap<ModelKind, Vec<Point>>> = BTreeMap::new();
    let mut vs_d: BTreeMap<usize, BTreeMap<ModelKind, Vec<Point>>> = BTreeMap::new();
    for r in &sweep.results {
        vs_k.entry(r.d).or_default().entry(r.kind).or_default().push(Point { x: r.k as f64, y: r.mean, err: r.std });
        vs_d.entry(r.k).or_default().entry(r.kind).or_default().push(Point { x: r.d as f64, y: r.mean, err: r.std });
    }
    let mut out = Vec::new();
    for (d, m) in vs_k {
        if m.values().any(|v| v.len() >= 2) {
            let chart = LineChart {
                title: format!("Sample complexity vs k, d = {d}"),
                x_label: "patches k".into(),
                y_label: "minimal n".into(),
                series: series_from(m),
            };
            out.push((format!("complexity_vs_k_d{d}.svg"), chart));
        }
    }
    for (k, m) in vs_d {
        if m.values().any(|v| v.len() >= 2) {
            let chart = LineChart {
                title: format!("Sample complexity vs d, k = {k}"),
                x_label: "patch dimension d".into(),
                y_label: "minimal n".into(),
                series: series_from(m),
            };
            out.push((format!("complexity_vs_d_k{k}.svg"), chart));
        }
    }
    out
}

fn write_all(charts: Vec<(String, LineChart)>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, chart) in charts.into_iter().filter(|(_, c)| !c.is_empty()) {
        let p = dir.join(name);
        chart.write(&p)?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn render_sweep_plots(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    write_all(sweep_charts(report), dir)
}

pub fn render_complexity_plots(sweep: &ComplexitySweep, dir: &Path) -> Result<Vec<PathBuf>> {
    write_all(complexity_charts(sweep), dir)
}
