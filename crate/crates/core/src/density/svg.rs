use std::fmt::Write as _;
use std::path::Path;

use super::mdplot::MdPlotSpec;
use crate::error::{Error, Result};

const SLOT_WIDTH: f64 = 120.0;
const HALF_WIDTH: f64 = 50.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PLOT_HEIGHT: f64 = 400.0;
const Y_TICKS: usize = 5;

/// SVG text of an MD plot: one vertical mirrored silhouette per series, a
/// shared value axis, and Bayes boundaries as horizontal rules. Output is a
/// pure function of the spec.
pub fn svg_string(spec: &MdPlotSpec) -> String {
    let k = spec.series.len();
    let width = MARGIN_LEFT + SLOT_WIDTH * k as f64 + 20.0;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let span = (spec.value_max - spec.value_min).max(f64::MIN_POSITIVE);
    let y_of = |v: f64| MARGIN_TOP + (spec.value_max - v) / span * PLOT_HEIGHT;
    let peak = spec
        .series
        .iter()
        .flat_map(|s| s.density.densities.iter().copied())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}" font-family="sans-serif" font-size="11">"#,
        width, height, width, height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // value axis
    let _ = writeln!(
        s,
        r#"<line x1="{x:.2}" y1="{t:.2}" x2="{x:.2}" y2="{b:.2}" stroke="black"/>"#,
        x = MARGIN_LEFT - 10.0,
        t = MARGIN_TOP,
        b = MARGIN_TOP + PLOT_HEIGHT
    );
    for i in 0..=Y_TICKS {
        let v = spec.value_min + span * i as f64 / Y_TICKS as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{a:.2}" y1="{y:.2}" x2="{b:.2}" y2="{y:.2}" stroke="black"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{v}</text>"#,
            a = MARGIN_LEFT - 14.0,
            b = MARGIN_LEFT - 10.0,
            tx = MARGIN_LEFT - 16.0,
            ty = y + 4.0,
            v = tick_label(v)
        );
    }

    for (i, series) in spec.series.iter().enumerate() {
        let cx = MARGIN_LEFT + SLOT_WIDTH * (i as f64 + 0.5);
        let d = &series.density;
        let mut right = String::new();
        let mut left = String::new();
        for (x, dens) in d.kernel_points.iter().zip(&d.densities) {
            let w = dens / peak * HALF_WIDTH;
            let y = y_of(*x);
            let _ = write!(right, "{:.2},{:.2} ", cx + w, y);
            left.insert_str(0, &format!("{:.2},{:.2} ", cx - w, y));
        }
        let _ = writeln!(
            s,
            r##"<polygon points="{}{}" fill="#7fa7d9" fill-opacity="0.7" stroke="#1f4e8c" stroke-width="0.8"/>"##,
            right,
            left.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{y1:.2}" text-anchor="middle">{}</text><text x="{cx:.2}" y="{y2:.2}" text-anchor="middle">n={} dip p={:.3}</text>"#,
            escape(&series.label),
            series.sample_size,
            series.dip.p_value,
            y1 = MARGIN_TOP + PLOT_HEIGHT + 20.0,
            y2 = MARGIN_TOP + PLOT_HEIGHT + 36.0,
        );
    }

    if let Some(overlay) = &spec.overlay {
        // mixture curve mirrored on the first series
        let cx = MARGIN_LEFT + SLOT_WIDTH * 0.5;
        let mut pts = String::new();
        for (x, y) in overlay.curve_x.iter().zip(&overlay.curve_y) {
            let _ = write!(pts, "{:.2},{:.2} ", cx + y / peak * HALF_WIDTH, y_of(*x));
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.2"/>"##,
            pts.trim_end()
        );
        for b in &overlay.boundaries {
            let y = y_of(*b);
            let _ = writeln!(
                s,
                r##"<line x1="{a:.2}" y1="{y:.2}" x2="{z:.2}" y2="{y:.2}" stroke="#c0392b" stroke-dasharray="5,3"/><text x="{z:.2}" y="{ty:.2}" text-anchor="end" fill="#c0392b">BD {v}</text>"##,
                a = MARGIN_LEFT - 10.0,
                z = width - 10.0,
                ty = y - 3.0,
                v = tick_label(*b)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(spec: &MdPlotSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, svg_string(spec)).map_err(|e| Error::io(path, e))
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
