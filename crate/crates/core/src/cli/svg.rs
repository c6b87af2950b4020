//! Static SVG overlay of polygons on `[0, n] x [0, dim H / d]`.

use std::fmt::Write;

use num_traits::{ToPrimitive, Zero};

use crate::Rational;

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const LEGEND: f64 = 150.0;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// One named polyline through exact vertices.
pub struct Series {
    pub label: String,
    pub vertices: Vec<(Rational, Rational)>,
}

fn f(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(0.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `series` on axes `[0, x_max] x [0, y_max]`.
pub fn plot(title: &str, x_max: &Rational, y_max: &Rational, series: &[Series]) -> String {
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let xm = if x_max.is_zero() { 1.0 } else { f(x_max) };
    let ym = if y_max.is_zero() { 1.0 } else { f(y_max) };
    let sx = |x: &Rational| MARGIN + f(x) / xm * plot_w;
    let sy = |y: &Rational| HEIGHT - MARGIN - f(y) / ym * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20">{}</text>"#, escape(title));
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M {x0} {top} L {x0} {y0} L {right} {y0}" fill="none" stroke="black"/>"#,
        top = MARGIN,
        right = MARGIN + plot_w
    );
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="middle">0</text>"#, y0 + 16.0);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_max}</text>"#,
        MARGIN + plot_w,
        y0 + 16.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{y_max}</text>"#, x0 - 6.0, MARGIN + 4.0);
    for (k, s) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let pts: Vec<String> = s
            .vertices
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if k >= COLOURS.len() { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"{dash}/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 18.0 * k as f64;
        let lx = WIDTH - LEGEND;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}
