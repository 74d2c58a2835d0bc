//! Static SVG of actual vs simulated values over specimen index.
//!
//! Output depends only on the input values, so identical reports give
//! byte-identical files. Each data point is one `<circle>`; legend markers
//! are rectangles.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const ACTUAL_COLOR: &str = "#1f77b4";
const SIMULATED_COLOR: &str = "#d62728";

pub struct Series<'a> {
    pub title: &'a str,
    pub y_label: &'a str,
    pub actual: &'a [f64],
    pub simulated: &'a [f64],
}

fn nice_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo {
        (hi - lo) * 0.1
    } else {
        lo.abs().max(1.0) * 0.1
    };
    (lo - pad, hi + pad)
}

/// Renders one channel. Panics if the two series differ in length.
pub fn render_svg(s: &Series) -> String {
    assert_eq!(s.actual.len(), s.simulated.len());
    let n = s.actual.len();
    let (y_lo, y_hi) = nice_bounds(s.actual.iter().chain(s.simulated).copied());
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |i: usize| {
        if n <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_of = |v: f64| MARGIN_TOP + plot_h * (y_hi - v) / (y_hi - y_lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        s.title
    );

    // axes
    let x_axis_y = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN_LEFT:.1},{MARGIN_TOP:.1} V{x_axis_y:.1} H{:.1}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT + plot_w
    );
    for t in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * t as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_LEFT:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    for i in 0..n {
        let x = x_of(i);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x_axis_y + 16.0,
            i + 1
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">specimen</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        s.y_label
    );

    for (values, color, class) in [
        (s.actual, ACTUAL_COLOR, "actual"),
        (s.simulated, SIMULATED_COLOR, "simulated"),
    ] {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", x_of(i), y_of(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            points.join(" ")
        );
        for (i, v) in values.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<circle class="{class}" cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                x_of(i),
                y_of(*v)
            );
        }
    }

    // legend
    let lx = WIDTH - MARGIN_RIGHT - 110.0;
    for (row, (label, color)) in [("actual", ACTUAL_COLOR), ("simulated", SIMULATED_COLOR)]
        .into_iter()
        .enumerate()
    {
        let y = MARGIN_TOP + 8.0 + 16.0 * row as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            y - 9.0,
            lx + 16.0,
            y
        );
    }
    svg.push_str("</svg>\n");
    svg
}
