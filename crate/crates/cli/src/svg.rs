//! Minimal SVG line and scatter plots. Output is plain text with fixed
//! number formatting, so identical data gives identical files.

use std::fmt::Write;

const W: f64 = 380.0;
const H: f64 = 300.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 15.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 45.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub min: f64,
    pub max: f64,
}

impl Axis {
    pub fn new(label: impl Into<String>, min: f64, max: f64) -> Self {
        let (min, max) = if max > min { (min, max) } else { (min - 0.5, min + 0.5) };
        Axis { label: label.into(), min, max }
    }

    /// Axis spanning `values` with 5% padding and a zero-anchored lower end
    /// for nonnegative data.
    pub fn fit(label: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.into_iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis::new(label, 0.0, 1.0);
        }
        if lo >= 0.0 {
            lo = 0.0;
        }
        let pad = 0.05 * (hi - lo).max(1e-9);
        Axis::new(label, if lo == 0.0 { 0.0 } else { lo - pad }, hi + pad)
    }
}

pub struct Series {
    pub label: String,
    /// `None` marks an undefined point; the line is broken there.
    pub points: Vec<(f64, Option<f64>)>,
}

/// One plot, positioned by [`compose`].
pub struct Panel {
    body: String,
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.min) / (self.x.max - self.x.min) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.min) / (self.y.max - self.y.min) * (H - TOP - BOTTOM)
    }

    fn draw(&self, title: &str, out: &mut String) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        writeln!(out, r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##, x1 - x0, y1 - y0).unwrap();
        writeln!(out, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title)).unwrap();
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x.min + t * (self.x.max - self.x.min);
            let yv = self.y.min + t * (self.y.max - self.y.min);
            let (px, py) = (self.px(xv), self.py(yv));
            writeln!(out, r##"<line x1="{px:.1}" y1="{y1:.1}" x2="{px:.1}" y2="{:.1}" stroke="#444"/>"##, y1 + 4.0).unwrap();
            writeln!(out, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#, y1 + 16.0, tick(xv)).unwrap();
            writeln!(out, r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="#444"/>"##, x0 - 4.0).unwrap();
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#, x0 - 6.0, py + 3.5, tick(yv)).unwrap();
        }
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#, (x0 + x1) / 2.0, H - 8.0, escape(&self.x.label)).unwrap();
        let cy = (y0 + y1) / 2.0;
        writeln!(out, r#"<text x="14" y="{cy:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 14 {cy:.1})">{}</text>"#, escape(&self.y.label)).unwrap();
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot; undefined points split the line into segments.
pub fn line_panel(title: &str, x: Axis, y: Axis, series: &[Series]) -> Panel {
    let frame = Frame { x, y };
    let mut body = String::new();
    frame.draw(title, &mut body);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(xv, yv) in &s.points {
            match yv {
                Some(yv) => segments.last_mut().unwrap().push((frame.px(xv), frame.py(yv))),
                None if !segments.last().unwrap().is_empty() => segments.push(Vec::new()),
                None => {}
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let pts: Vec<String> = seg.iter().map(|(a, b)| format!("{a:.1},{b:.1}")).collect();
            writeln!(body, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
            for (a, b) in seg {
                writeln!(body, r#"<circle cx="{a:.1}" cy="{b:.1}" r="2" fill="{color}"/>"#).unwrap();
            }
        }
        if series.len() > 1 {
            let ly = TOP + 14.0 + 14.0 * k as f64;
            writeln!(body, r#"<text x="{:.1}" y="{ly:.1}" font-size="10" fill="{color}">{}</text>"#, LEFT + 8.0, escape(&s.label)).unwrap();
        }
    }
    Panel { body }
}

/// Scatter plot with an optional identity line and a corner annotation.
pub fn scatter_panel(title: &str, x: Axis, y: Axis, points: &[(f64, f64)], annotation: &str, identity: bool) -> Panel {
    let frame = Frame { x, y };
    let mut body = String::new();
    frame.draw(title, &mut body);
    if identity {
        let lo = frame.x.min.max(frame.y.min);
        let hi = frame.x.max.min(frame.y.max);
        if hi > lo {
            writeln!(
                body,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
                frame.px(lo),
                frame.py(lo),
                frame.px(hi),
                frame.py(hi)
            )
            .unwrap();
        }
    }
    for &(a, b) in points {
        writeln!(body, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{}" fill-opacity="0.7"/>"#, frame.px(a), frame.py(b), COLORS[0]).unwrap();
    }
    writeln!(body, r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#, LEFT + 8.0, TOP + 16.0, escape(annotation)).unwrap();
    Panel { body }
}

/// Lays panels out left to right in one SVG document.
pub fn compose(panels: &[Panel]) -> String {
    let width = W * panels.len() as f64;
    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{H:.0}" viewBox="0 0 {width:.0} {H:.0}" font-family="sans-serif">"#).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (i, p) in panels.iter().enumerate() {
        writeln!(out, r#"<g transform="translate({:.0},0)">"#, W * i as f64).unwrap();
        out.push_str(&p.body);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
