//! Minimal SVG scatter/line plots. Non-authoritative: plots are a
//! convenience for eyeballing results, nothing reads them back.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;

/// Axis scale for one dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One polyline with a label and stroke color.
pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn transform(value: f64, scale: Scale) -> Option<f64> {
    match scale {
        Scale::Linear => Some(value),
        Scale::Log => (value > 0.0).then(|| value.ln()),
    }
}

/// Writes a single-panel plot of the given series. Points that cannot be
/// shown on the chosen scales (non-positive on a log axis, non-finite)
/// are dropped silently.
pub fn write_plot(
    path: &Path,
    title: &str,
    x_scale: Scale,
    y_scale: Scale,
    series: &[Series<'_>],
) -> Result<()> {
    let mut cleaned: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter_map(|&(x, y)| {
                let tx = transform(x, x_scale)?;
                let ty = transform(y, y_scale)?;
                (tx.is_finite() && ty.is_finite()).then_some((tx, ty))
            })
            .collect();
        if !pts.is_empty() {
            cleaned.push((i, pts));
        }
    }

    let all: Vec<(f64, f64)> = cleaned.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut x_lo, mut x_hi) = (f64::MAX, f64::MIN);
    let (mut y_lo, mut y_hi) = (f64::MAX, f64::MIN);
    for &(x, y) in &all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if all.is_empty() {
        x_lo = 0.0;
        x_hi = 1.0;
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if x_hi - x_lo < 1e-300 {
        x_hi = x_lo + 1.0;
    }
    if y_hi - y_lo < 1e-300 {
        y_hi = y_lo + 1.0;
    }

    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    // Axes box.
    let _ = writeln!(
        svg,
        "  <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (i, pts) in &cleaned {
        let s = &series[*i];
        let mut attr = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(attr, "{}{:.2},{:.2}", if j > 0 { " " } else { "" }, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "  <polyline points=\"{attr}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            s.color
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{}\">{}</text>",
            MARGIN + 6.0,
            MARGIN + 16.0 + 14.0 * *i as f64,
            s.color,
            escape(s.label)
        );
    }
    let _ = writeln!(svg, "</svg>");

    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn writes_well_formed_svg() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("p.svg");
        write_plot(
            &path,
            "demo",
            Scale::Log,
            Scale::Log,
            &[Series {
                label: "series",
                color: "steelblue",
                points: vec![(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)],
            }],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert!(text.contains("polyline"));
    }

    #[test]
    fn drops_nonpositive_points_on_log_axes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("p.svg");
        write_plot(
            &path,
            "demo",
            Scale::Log,
            Scale::Log,
            &[Series {
                label: "s",
                color: "black",
                points: vec![(0.0, 1.0), (-1.0, 2.0)],
            }],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains("polyline"));
    }
}
