//! Series dumps and bare-bones SVG figures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HdfeError, Result};
use crate::experiments::{PlotKind, RunData, Series};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

/// Writes `series/<name>.csv` and `figures/<name>.svg` under `dir` for every
/// series. Nothing is created when there are no series.
pub fn emit_plots(data: &RunData, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if data.series.is_empty() {
        return Ok(written);
    }
    let series_dir = dir.join("series");
    let fig_dir = dir.join("figures");
    for d in [&series_dir, &fig_dir] {
        fs::create_dir_all(d).map_err(|e| HdfeError::io(d, e))?;
    }
    for (name, s) in &data.series {
        let csv_path = series_dir.join(format!("{name}.csv"));
        write_series_csv(&csv_path, s)?;
        written.push(csv_path);
        let svg_path = fig_dir.join(format!("{name}.svg"));
        fs::write(&svg_path, render_svg(name, s)).map_err(|e| HdfeError::io(&svg_path, e))?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Shortest round-trip decimal, so reading back is bit-exact.
pub fn write_series_csv(path: &Path, s: &Series) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record([s.x_label.as_str(), s.y_label.as_str()])
        .map_err(|e| csv_io(path, e))?;
    for (x, y) in s.x.iter().zip(&s.y) {
        w.write_record([x.to_string(), y.to_string()])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| HdfeError::io(path, e))
}

pub fn read_series_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| HdfeError::Csv {
            line,
            reason: e.to_string(),
        })?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| HdfeError::Csv {
                    line,
                    reason: format!("column {} is not a number", k + 1),
                })
        };
        xs.push(field(0)?);
        ys.push(field(1)?);
    }
    Ok((xs, ys))
}

fn csv_io(path: &Path, e: csv::Error) -> HdfeError {
    HdfeError::io(path, std::io::Error::other(e.to_string()))
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(title: &str, s: &Series) -> String {
    let (x0, x1) = bounds(&s.x);
    let (y0, y1) = bounds(&s.y);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0,
        escape(&s.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&s.y_label)
    );
    for (v, x, y, anchor) in [
        (x0, MARGIN, HEIGHT - MARGIN + 14.0, "start"),
        (x1, WIDTH - MARGIN, HEIGHT - MARGIN + 14.0, "end"),
        (y0, MARGIN - 4.0, HEIGHT - MARGIN, "end"),
        (y1, MARGIN - 4.0, MARGIN + 8.0, "end"),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }

    let pts: Vec<(f64, f64)> = s
        .x
        .iter()
        .zip(&s.y)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (px(x), py(y)))
        .collect();
    match s.kind {
        PlotKind::Line => {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        PlotKind::Scatter => {
            for (x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="steelblue"/>"#);
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
