//! Self-contained SVG line plots with axes, ticks and a legend.

use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 58.0;

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Dots,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    /// Non-finite points break the polyline.
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: Option<&'static str>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Series { name: name.into(), points, style, color: None }
    }

    pub fn color(mut self, c: &'static str) -> Self {
        self.color = Some(c);
        self
    }
}

/// Vertical line at `x`.
#[derive(Clone, Debug)]
pub struct Marker {
    pub x: f64,
    pub label: String,
}

/// Shaded vertical strip `[x0, x1]`.
#[derive(Clone, Debug)]
pub struct Shade {
    pub x0: f64,
    pub x1: f64,
    pub label: String,
}

/// Filled data-space rectangle, for category maps.
#[derive(Clone, Copy, Debug)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub fill: &'static str,
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    pub shades: Vec<Shade>,
    pub cells: Vec<Cell>,
    /// Legend entries for cell colors.
    pub swatches: Vec<(String, &'static str)>,
    /// Free text lines drawn inside the frame.
    pub notes: Vec<String>,
    /// Draw a dashed line at `y = 0`.
    pub zero_line: bool,
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Plot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), ..Plot::default() }
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        for c in &self.cells {
            xs.extend([c.x0, c.x1]);
            ys.extend([c.y0, c.y1]);
        }
        xs.extend(self.markers.iter().map(|m| m.x).filter(|x| x.is_finite()));
        if self.zero_line {
            ys.push(0.0);
        }
        (span(&xs), span(&ys))
    }

    pub fn render(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let xt = ticks(x0, x1);
        let yt = ticks(y0, y1);
        let (x0, x1) = (x0.min(xt[0]), x1.max(*xt.last().unwrap()));
        let (y0, y1) = (y0.min(yt[0]), y1.max(*yt.last().unwrap()));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            o,
            r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            o,
            r#"<defs><clipPath id="frame"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
        );

        let _ = writeln!(o, r#"<g clip-path="url(#frame)">"#);
        for c in &self.cells {
            let (a, b) = (sx(c.x0), sx(c.x1));
            let (t, u) = (sy(c.y1), sy(c.y0));
            let _ = writeln!(
                o,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                f(a),
                f(t),
                f(b - a),
                f(u - t),
                c.fill
            );
        }
        for s in &self.shades {
            let (a, b) = (sx(s.x0.max(x0)), sx(s.x1.min(x1)));
            let _ = writeln!(
                o,
                r##"<rect x="{}" y="{TOP}" width="{}" height="{ph}" fill="#ffd54f" fill-opacity="0.3"/>"##,
                f(a),
                f((b - a).max(0.0))
            );
        }
        o.push_str("</g>\n");

        // Grid, ticks and axes.
        for &t in &xt {
            let x = sx(t);
            let _ = writeln!(
                o,
                r##"<line x1="{0}" y1="{TOP}" x2="{0}" y2="{1}" stroke="#e0e0e0"/>"##,
                f(x),
                TOP + ph
            );
            let _ = writeln!(
                o,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                f(x),
                TOP + ph + 16.0,
                tick_label(t, &xt)
            );
        }
        for &t in &yt {
            let y = sy(t);
            let _ = writeln!(
                o,
                r##"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="#e0e0e0"/>"##,
                f(y),
                LEFT + pw
            );
            let _ = writeln!(
                o,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                f(y + 4.0),
                tick_label(t, &yt)
            );
        }
        let _ = writeln!(
            o,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            o,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 14.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            o,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );

        let _ = writeln!(o, r#"<g clip-path="url(#frame)">"#);
        if self.zero_line && y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                o,
                r##"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="#555" stroke-dasharray="2,3"/>"##,
                f(sy(0.0)),
                LEFT + pw
            );
        }
        for m in &self.markers {
            let x = sx(m.x);
            let _ = writeln!(
                o,
                r##"<line x1="{0}" y1="{TOP}" x2="{0}" y2="{1}" stroke="#444" stroke-dasharray="6,4"/>"##,
                f(x),
                TOP + ph
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = s.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            match s.style {
                Style::Dots => {
                    for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                        let _ = writeln!(
                            o,
                            r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}"/>"#,
                            f(sx(x)),
                            f(sy(y))
                        );
                    }
                }
                Style::Line | Style::Dashed => {
                    let dash = if s.style == Style::Dashed { r#" stroke-dasharray="7,5""# } else { "" };
                    for run in segments(&s.points) {
                        let pts: Vec<String> =
                            run.iter().map(|&(x, y)| format!("{},{}", f(sx(x)), f(sy(y)))).collect();
                        let _ = writeln!(
                            o,
                            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{}"/>"#,
                            pts.join(" ")
                        );
                    }
                }
            }
        }
        o.push_str("</g>\n");
        for m in &self.markers {
            let _ = writeln!(
                o,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                f(sx(m.x)),
                TOP - 4.0,
                esc(&m.label)
            );
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(
                o,
                r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
                LEFT + 8.0,
                TOP + 18.0 + 15.0 * i as f64,
                esc(n)
            );
        }

        // Legend.
        let lx = LEFT + pw + 14.0;
        let mut ly = TOP + 6.0;
        o.push_str("<g class=\"legend\">\n");
        for (i, s) in self.series.iter().enumerate() {
            let color = s.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            match s.style {
                Style::Dots => {
                    let _ = writeln!(o, r#"<circle cx="{}" cy="{}" r="3.5" fill="{color}"/>"#, lx + 11.0, ly);
                }
                Style::Line | Style::Dashed => {
                    let dash = if s.style == Style::Dashed { r#" stroke-dasharray="7,5""# } else { "" };
                    let _ = writeln!(
                        o,
                        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                        lx + 22.0
                    );
                }
            }
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, esc(&s.name));
            ly += 18.0;
        }
        for (name, fill) in &self.swatches {
            let _ = writeln!(o, r#"<rect x="{lx}" y="{}" width="22" height="10" fill="{fill}"/>"#, ly - 5.0);
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, esc(name));
            ly += 18.0;
        }
        for s in &self.shades {
            let _ = writeln!(
                o,
                r##"<rect x="{lx}" y="{}" width="22" height="10" fill="#ffd54f" fill-opacity="0.3"/>"##,
                ly - 5.0
            );
            let _ = writeln!(o, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, esc(&s.label));
            ly += 18.0;
        }
        o.push_str("</g>\n</svg>\n");
        o
    }
}

fn f(x: f64) -> String {
    format!("{x:.2}")
}

/// Minimum and maximum of `v`, widened when degenerate.
fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (lo.abs() + hi.abs()).max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Runs of consecutive finite points.
fn segments(points: &[(f64, f64)]) -> Vec<&[(f64, f64)]> {
    points.split(|(x, y)| !(x.is_finite() && y.is_finite())).filter(|s| !s.is_empty()).collect()
}

/// Round tick positions covering `[lo, hi]` with steps of 1, 2 or 5 times a power of ten.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step).ceil() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(t: f64, all: &[f64]) -> String {
    let step = if all.len() > 1 { all[1] - all[0] } else { 1.0 };
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    if t.abs() >= 1e5 || (t != 0.0 && t.abs() < 1e-4) {
        format!("{t:.1e}")
    } else {
        let s = format!("{t:.decimals$}");
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            "0".to_string()
        } else {
            s
        }
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
