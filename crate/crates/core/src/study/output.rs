use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{Cell, SlopeFit, StudyResult};
use crate::error::{Error, Result};

/// Paths written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => format!("{v:.12e}"),
        Cell::Text(s) => s.clone(),
    }
}

/// Header row then one line per row, comma separated, LF endings.
pub fn csv_string(result: &StudyResult) -> String {
    let mut out = result.columns.join(",");
    out.push('\n');
    for row in &result.rows {
        let line: Vec<String> = row.iter().map(cell_text).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_json(result: &StudyResult) -> serde_json::Value {
    let status = if result.criteria.is_empty() {
        "no assertions"
    } else if result.passed() {
        "pass"
    } else {
        "fail"
    };
    json!({
        "study": result.kind.name(),
        "seed": result.seed,
        "status": status,
        "criteria": result.criteria,
        "fits": result.fits.iter().map(|f| json!({
            "label": f.label,
            "x": f.x_name,
            "y": f.y_name,
            "slope": f.slope,
            "intercept": f.intercept,
            "r2": f.r2,
            "ci95": [f.ci95.0, f.ci95.1],
        })).collect::<Vec<_>>(),
        "notes": result.notes,
    })
}

fn decade_range(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let mut hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil();
    if hi <= lo {
        hi = lo + 1.0;
    }
    (lo, hi)
}

/// Log-log scatter of the fitted points with the fitted line, as SVG.
pub fn svg_plot(fit: &SlopeFit) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (80.0, 20.0, 50.0, 60.0);
    let (x0, x1) = decade_range(&fit.xs);
    let (y0, y1) = decade_range(&fit.ys);
    let px = |x: f64| ml + (x.log10() - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y.log10() - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<title>{}: slope = {:.4} (R2 = {:.4})</title>"#, fit.label, fit.slope, fit.r2);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}: slope = {:.4} (R2 = {:.4})</text>"#,
        w / 2.0,
        fit.label,
        fit.slope,
        fit.r2
    );
    let _ = writeln!(
        s,
        r#"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - ml - mr,
        h - mt - mb
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{x}" y1="{mt}" x2="{x}" y2="{}" stroke="#ddd"/>"##, h - mb);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">1e{d}</text>"#,
            h - mb + 18.0
        );
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, w - mr);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">1e{d}</text>"#,
            ml - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        h - 15.0,
        fit.x_name
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        fit.y_name
    );
    let xa = fit.xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let xb = fit.xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let line = |x: f64| (fit.intercept + fit.slope * x.ln()).exp();
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="2"/>"#,
        px(xa),
        py(line(xa)),
        px(xb),
        py(line(xb))
    );
    for (&x, &y) in fit.xs.iter().zip(&fit.ys) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

/// Write `<study>.csv`, `<study>_summary.json` and one SVG per fit into `dir`.
pub fn emit_outputs(result: &StudyResult, dir: &Path) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let name = result.kind.name();
    let csv = dir.join(format!("{name}.csv"));
    write(&csv, &csv_string(result))?;
    let summary = dir.join(format!("{name}_summary.json"));
    let text = serde_json::to_string_pretty(&summary_json(result)).expect("summary serializes");
    write(&summary, &(text + "\n"))?;
    let mut plots = Vec::new();
    for fit in &result.fits {
        let path = dir.join(format!("{name}_{}.svg", file_stem(&fit.label)));
        write(&path, &svg_plot(fit))?;
        plots.push(path);
    }
    Ok(OutputFiles { csv, summary, plots })
}
