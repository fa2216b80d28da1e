//! Minimal deterministic SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 4000;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
}

/// Round tick positions covering `[lo, hi]`, steps of 1, 2 or 5 times a
/// power of ten.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw * (1.0 - 1e-9)).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let s = format!("{v:.decimals$}");
    if s == "-0" { "0".into() } else { s }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// One `<polyline>` per series; axes and ticks are drawn with `<line>`.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.xs.iter().copied()));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.ys.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );
    let _ = writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, TOP + ph);

    let xt = nice_ticks(x0, x1, 8);
    let xstep = if xt.len() > 1 { xt[1] - xt[0] } else { 1.0 };
    for &t in &xt {
        let x = sx(t);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t, xstep));
    }
    let yt = nice_ticks(y0, y1, 6);
    let ystep = if yt.len() > 1 { yt[1] - yt[0] } else { 1.0 };
    for &t in &yt {
        let y = sy(t);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t, ystep));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let n = s.xs.len().min(s.ys.len());
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if n > 0 && idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        for k in idx {
            if s.xs[k].is_finite() && s.ys[k].is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(s.xs[k]), sy(s.ys[k]));
            }
        }
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.trim_end());
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#, ly - 4.0, lx + 20.0, ly - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 26.0, escape(s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_ticks(0.0, 500.0, 5), vec![0.0, 100.0, 200.0, 300.0, 400.0, 500.0]);
        let t = nice_ticks(20.9, 21.2, 6);
        assert!(t.len() >= 3);
        for w in t.windows(2) {
            assert!(((w[1] - w[0]) - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn one_polyline_per_series_and_deterministic() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64 * 0.01).collect();
        let a: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let b: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let series = [Series { label: "a", xs: &xs, ys: &a }, Series { label: "b<c", xs: &xs, ys: &b }];
        let svg = line_plot("t", "x", "y", &series);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(r#"viewBox="0 0 800 500""#));
        assert!(svg.contains("b&lt;c"));
        assert_eq!(svg, line_plot("t", "x", "y", &series));
    }

    #[test]
    fn flat_series_is_drawn() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [5.0, 5.0, 5.0];
        let svg = line_plot("flat", "t", "y", &[Series { label: "c", xs: &xs, ys: &ys }]);
        assert!(!svg.contains("NaN"));
    }
}
