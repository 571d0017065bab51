use std::fmt::Write as _;

use super::ContourSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub title: Option<String>,
    pub x_label: String,
    pub y_label: String,
    pub stroke_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 720.0,
            height: 540.0,
            margin: 70.0,
            title: None,
            x_label: "added real images (n_real+)".into(),
            y_label: "added synthetic images (n_syn+)".into(),
            stroke_width: 1.5,
        }
    }
}

const RAMP: [(f64, f64, f64); 3] = [(44.0, 123.0, 182.0), (253.0, 174.0, 97.0), (215.0, 25.0, 28.0)];
const LEGEND_WIDTH: f64 = 110.0;

/// Blue to orange to red.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, u) = if t <= 1.0 {
        (RAMP[0], RAMP[1], t)
    } else {
        (RAMP[1], RAMP[2], t - 1.0)
    };
    let mix = |x: f64, y: f64| (x + (y - x) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Standalone SVG of a contour set: frame, axis ticks and titles, one
/// labelled `<polyline>` per contour line and a legend mapping accuracy
/// to color. Output depends only on the inputs.
pub fn render_svg(contours: &ContourSet, style: &SvgStyle) -> Result<String> {
    let g = &contours.grid;
    if !(g.x_max > g.x_min) || !(g.y_max > g.y_min) || !g.x_max.is_finite() || !g.y_max.is_finite() {
        return Err(Error::Render("degenerate axis range".into()));
    }
    if contours.is_empty() {
        return Err(Error::Render("contour set has no polylines".into()));
    }
    let plot_w = style.width - 2.0 * style.margin - LEGEND_WIDTH;
    let plot_h = style.height - 2.0 * style.margin;
    if !(plot_w > 0.0 && plot_h > 0.0) {
        return Err(Error::Render("canvas too small for margins".into()));
    }
    let (x0, y0) = (style.margin, style.margin);
    let sx = |x: f64| x0 + (x - g.x_min) / (g.x_max - g.x_min) * plot_w;
    let sy = |y: f64| y0 + plot_h - (y - g.y_min) / (g.y_max - g.y_min) * plot_h;

    let lo = contours.levels.iter().map(|l| l.level).fold(f64::INFINITY, f64::min);
    let hi = contours
        .levels
        .iter()
        .map(|l| l.level)
        .fold(f64::NEG_INFINITY, f64::max);
    let t_of = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
        style.width, style.height
    );
    if let Some(title) = &style.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            x0 + plot_w / 2.0,
            y0 / 2.0,
            escape(title)
        );
    }

    // frame and ticks
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333"/>"##
    );
    let _ = writeln!(s, r#"<g class="axes">"#);
    for k in 0..=4 {
        let fx = g.x_min + (g.x_max - g.x_min) * k as f64 / 4.0;
        let fy = g.y_min + (g.y_max - g.y_min) * k as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let bottom = y0 + plot_h;
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333"/>"##,
            bottom + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="#333333"/>"##,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        x0 + plot_w / 2.0,
        y0 + plot_h + 40.0,
        escape(&style.x_label)
    );
    let (lx, ly) = (x0 - 52.0, y0 + plot_h / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&style.y_label)
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="contours" fill="none">"#);
    for level in &contours.levels {
        let color = ramp(t_of(level.level));
        for line in &level.polylines {
            let pts: Vec<String> = line
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" stroke="{color}" stroke-width="{}" data-level="{:.4}"><title>accuracy {:.2}</title></polyline>"#,
                pts.join(" "),
                style.stroke_width,
                level.level,
                level.level
            );
            let (mx, my) = line[line.len() / 2];
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}" font-size="10">{:.2}</text>"#,
                sx(mx) + 3.0,
                sy(my) - 3.0,
                level.level
            );
        }
    }
    let _ = writeln!(s, "</g>");

    // legend: one swatch per level plus a continuous ramp
    let lx = x0 + plot_w + 20.0;
    let _ = writeln!(s, r#"<g class="legend">"#);
    let _ = writeln!(s, r#"<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">"#);
    for k in 0..RAMP.len() {
        let t = k as f64 / (RAMP.len() - 1) as f64;
        let _ = writeln!(s, r#"<stop offset="{t:.1}" stop-color="{}"/>"#, ramp(t));
    }
    let _ = writeln!(s, "</linearGradient></defs>");
    let _ = writeln!(
        s,
        r##"<rect x="{lx:.2}" y="{y0:.2}" width="14" height="{plot_h:.2}" fill="url(#ramp)" stroke="#333333"/>"##
    );
    let _ = writeln!(s, r#"<text x="{lx:.2}" y="{:.2}">accuracy (%)</text>"#, y0 - 8.0);
    for level in &contours.levels {
        let py = y0 + plot_h - t_of(level.level) * plot_h;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{:.2}</text>"#,
            lx + 20.0,
            py + 4.0,
            level.level
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{trace_contours, GridSpec};

    fn planar() -> ContourSet {
        trace_contours(|x, y| x + y, &GridSpec::square(10.0, 16), &[5.0, 10.0]).unwrap()
    }

    #[test]
    fn two_levels_two_polylines() {
        let svg = render_svg(&planar(), &SvgStyle::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<title>accuracy").count(), 2);
        assert!(svg.contains("accuracy 5.00") && svg.contains("accuracy 10.00"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn byte_identical() {
        let style = SvgStyle {
            title: Some("a & b".into()),
            ..SvgStyle::default()
        };
        let a = render_svg(&planar(), &style).unwrap();
        let b = render_svg(&planar(), &style).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("a &amp; b"));
    }

    #[test]
    fn empty_and_degenerate_rejected() {
        let empty = trace_contours(|x, y| x + y, &GridSpec::square(10.0, 16), &[50.0]).unwrap();
        assert!(matches!(
            render_svg(&empty, &SvgStyle::default()),
            Err(Error::Render(_))
        ));
        let mut bad = planar();
        bad.grid.x_max = bad.grid.x_min;
        assert!(matches!(render_svg(&bad, &SvgStyle::default()), Err(Error::Render(_))));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#2c7bb6");
        assert_eq!(ramp(1.0), "#d7191c");
    }
}
