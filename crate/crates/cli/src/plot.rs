//! Static SVG convergence plots: log-scale residual against iteration or
//! wall time, one polyline per series.

use std::fmt::Write;

use anyhow::bail;

pub struct Series {
    pub label: String,
    /// `(x, relative residual)` pairs.
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(series: &[Series], x_label: &str) -> anyhow::Result<String> {
    if series.is_empty() {
        bail!("nothing to plot");
    }
    if let Some(s) = series.iter().find(|s| s.points.is_empty()) {
        bail!("series `{}` has no points", s.label);
    }
    let finite = |v: f64| v.is_finite();
    let positive: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|&r| finite(r) && r > 0.0)
        .collect();
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (y_min, y_max) = if positive.is_empty() {
        (-16.0, 0.0)
    } else {
        let (a, b) = (lo.log10().floor(), hi.log10().ceil());
        if a == b { (a - 1.0, b + 1.0) } else { (a, b) }
    };
    let floor = 10f64.powf(y_min);
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .filter(|x| finite(*x))
        .fold(0.0f64, f64::max);
    let x_max = if x_max > 0.0 { x_max } else { 1.0 };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |r: f64| {
        let l = r.max(floor).log10();
        TOP + (y_max - l) / (y_max - y_min) * plot_h
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )?;
    writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    )?;

    let decades = (y_max - y_min) as i64;
    let step = (decades as f64 / 8.0).ceil().max(1.0) as i64;
    let mut e = y_min as i64;
    while e <= y_max as i64 {
        let y = py(10f64.powi(e as i32));
        writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + plot_w)?;
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0)?;
        e += step;
    }
    for i in 0..=4 {
        let x = x_max * i as f64 / 4.0;
        let label = if x_max >= 10.0 { format!("{x:.0}") } else { format!("{x:.2}") };
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            px(x),
            TOP + plot_h + 18.0
        )?;
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    )?;
    writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">relative residual</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )?;

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (x, r) in s.points.iter().filter(|(x, r)| finite(*x) && !r.is_nan()) {
            let cmd = if d.is_empty() { 'M' } else { 'L' };
            write!(d, "{cmd}{:.2},{:.2} ", px(*x), py(*r))?;
        }
        writeln!(svg, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end())?;

        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )?;
        writeln!(
            svg,
            r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        )?;
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}
