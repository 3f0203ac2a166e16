//! Plot data series as CSV, with minimal SVG renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::eval::RocPoint;
use crate::experiments::ExperimentReport;
use crate::io::results::write_atomic;

const W: f64 = 480.0;
const H: f64 = 320.0;
const M: f64 = 40.0;

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for (px, py) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
        let widen = |r: (f64, f64)| {
            if !r.0.is_finite() {
                (0.0, 1.0)
            } else if r.0 == r.1 {
                (r.0 - 0.5, r.1 + 0.5)
            } else {
                r
            }
        };
        Axes { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = M + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * M);
        let sy = H - M - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * M);
        (sx, sy)
    }
}

fn svg_frame(title: &str, axes: &Axes, body: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#, H - M, W - M);
    let _ = writeln!(s, r#"<text x="{M}" y="{}">{:.3}</text><text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, H - M + 14.0, axes.x.0, W - M, H - M + 14.0, axes.x.1);
    let _ = writeln!(s, r#"<text x="4" y="{}">{:.3}</text><text x="4" y="{}">{:.3}</text>"#, H - M, axes.y.0, M + 4.0, axes.y.1);
    s.push_str(body);
    s.push_str("</svg>\n");
    s
}

fn svg_line(title: &str, series: &[Vec<(f64, f64)>]) -> String {
    let axes = Axes::fit(series.iter().flatten().copied());
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    let mut body = String::new();
    for (i, pts) in series.iter().enumerate() {
        let d: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| {
                let (a, b) = axes.px(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let _ = writeln!(body, r#"<polyline points="{}" fill="none" stroke="{}"/>"#, d.join(" "), colors[i % colors.len()]);
    }
    svg_frame(title, &axes, &body)
}

fn svg_bars(title: &str, bars: &[(f64, f64)]) -> String {
    let axes = Axes::fit(bars.iter().copied().chain(bars.iter().map(|b| (b.0 + 1.0, 0.0))));
    let mut body = String::new();
    for &(x, y) in bars {
        let (x0, y0) = axes.px(x, y);
        let (x1, y1) = axes.px(x + 1.0, 0.0);
        let _ = writeln!(body, r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"/>"##, (x1 - x0).max(0.0), (y1 - y0).max(0.0));
    }
    svg_frame(title, &axes, &body)
}

fn num(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(|v| v.to_string()).unwrap_or_default()
}

fn emit(out_dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let p = out_dir.join(name);
    write_atomic(&p, contents.as_bytes())?;
    written.push(p);
    Ok(())
}

fn roc_csv(roc: &[RocPoint]) -> String {
    let mut s = String::from("fpr,tpr\n");
    for p in roc {
        let _ = writeln!(s, "{},{}", p.fpr, p.tpr);
    }
    s
}

/// Writes every data series the report carries; returns the paths written.
/// Output depends only on the report, so re-emission is byte-identical.
pub fn emit_plot_data(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| crate::Error::io(out_dir, e))?;
    let mut written = Vec::new();

    if let Some(first) = report.conditions.first() {
        emit(out_dir, "roc.csv", &roc_csv(&first.roc), &mut written)?;
        for c in &report.conditions {
            emit(out_dir, &format!("roc_{}.csv", c.condition), &roc_csv(&c.roc), &mut written)?;
        }
        let series: Vec<Vec<(f64, f64)>> = report.conditions.iter().map(|c| c.roc.iter().map(|p| (p.fpr, p.tpr)).collect()).collect();
        emit(out_dir, "roc.svg", &svg_line("ROC", &series), &mut written)?;
    }

    if !report.curve.is_empty() {
        let mut acc = String::from("days,mean,std\n");
        let mut eff = String::from("days,d_h1h2std,d_nsamskew\n");
        for p in &report.curve {
            let _ = writeln!(acc, "{},{},{}", p.days, num(Some(p.accuracy_pct.mean)), num(Some(p.accuracy_pct.std)));
            let _ = writeln!(eff, "{},{},{}", p.days, num(p.d_h1h2_std), num(p.d_nsam_skewness));
        }
        emit(out_dir, "accuracy_vs_days.csv", &acc, &mut written)?;
        emit(out_dir, "effectsize_vs_days.csv", &eff, &mut written)?;
        let mean: Vec<(f64, f64)> = report.curve.iter().map(|p| (p.days as f64, p.accuracy_pct.mean)).collect();
        let mut series = vec![mean];
        if let Some(fit) = &report.power_fit {
            series.push(report.curve.iter().map(|p| (p.days as f64, fit.predict(p.days as f64))).collect());
        }
        emit(out_dir, "accuracy_vs_days.svg", &svg_line("accuracy (%) vs days", &series), &mut written)?;
        let d = |f: fn(&crate::experiments::CurvePoint) -> Option<f64>| -> Vec<(f64, f64)> {
            report.curve.iter().filter_map(|p| f(p).map(|v| (p.days as f64, v))).collect()
        };
        emit(
            out_dir,
            "effectsize_vs_days.svg",
            &svg_line("Cohen's D vs days", &[d(|p| p.d_h1h2_std), d(|p| p.d_nsam_skewness)]),
            &mut written,
        )?;
    }

    if let Some(null) = &report.null {
        let mut s = String::from("bin,count\n");
        for b in &null.histogram {
            let _ = writeln!(s, "{},{}", b.bin, b.count);
        }
        emit(out_dir, "null_hist.csv", &s, &mut written)?;
        let bars: Vec<(f64, f64)> = null.histogram.iter().map(|b| (b.bin as f64, b.count as f64)).collect();
        emit(out_dir, "null_hist.svg", &svg_bars("null accuracy (%)", &bars), &mut written)?;
    }
    Ok(written)
}
