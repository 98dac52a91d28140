//! Dependency-free SVG plots. Every data point is a `<circle>` whose
//! `data-x`/`data-y` attributes carry the same strings as the sibling CSV.

use std::fmt::Write as _;

use crate::formats::fmt_num;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 45.0;
const COLORS: &[&str] = &["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    PathAngle,
    EigenScatter,
    NormTrace,
    Quiver,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::PathAngle => "path-angle",
            PlotKind::EigenScatter => "eigen-scatter",
            PlotKind::NormTrace => "norm-trace",
            PlotKind::Quiver => "quiver",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

/// Points with their CSV strings; `None` breaks a line.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub style: Style,
    pub points: Vec<Option<(f64, f64)>>,
}

impl Series {
    pub fn line(name: &str, xs: &[f64], ys: &[Option<f64>]) -> Self {
        let points = xs.iter().zip(ys).map(|(&x, y)| y.map(|y| (x, y))).collect();
        Series { name: name.to_string(), style: Style::Line, points }
    }

    pub fn markers(name: &str, pts: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Series { name: name.to_string(), style: Style::Markers, points: pts.into_iter().map(Some).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Axis { label: label.to_string(), log: false }
    }

    pub fn log(label: &str) -> Self {
        Axis { label: label.to_string(), log: true }
    }
}

/// Arrow from `(x, y)` along `(u, v)`, drawn scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrow {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    pub arrows: Vec<Arrow>,
    /// Horizontal reference line, e.g. `y = 0`.
    pub hline: Option<f64>,
}

impl Panel {
    pub fn new(title: &str, x: Axis, y: Axis) -> Self {
        Panel { title: title.to_string(), x, y, series: Vec::new(), arrows: Vec::new(), hline: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgPlot {
    pub kind: PlotKind,
    pub title: String,
    pub panels: Vec<Panel>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, p0: f64, p1: f64) -> Self {
        let t = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(t)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        } else {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Scale { lo, hi, log, p0, p1 }
    }

    fn visible(&self, v: f64) -> bool {
        v.is_finite() && (!self.log || v > 0.0)
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.p0 + (t - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let label = if self.log { format!("1e{t:.1}") } else { format!("{t:.3}") };
                (self.p0 + (self.p1 - self.p0) * i as f64 / 4.0, label)
            })
            .collect()
    }
}

impl SvgPlot {
    pub fn new(kind: PlotKind, title: &str) -> Self {
        SvgPlot { kind, title: title.to_string(), panels: Vec::new() }
    }

    pub fn render(&self) -> String {
        let height = MARGIN_TOP + self.panels.len().max(1) as f64 * PANEL_HEIGHT;
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" data-kind="{}">"#,
            self.kind.as_str()
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        for (i, p) in self.panels.iter().enumerate() {
            render_panel(&mut s, p, MARGIN_TOP + i as f64 * PANEL_HEIGHT);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn render_panel(s: &mut String, p: &Panel, top: f64) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (top + PANEL_HEIGHT - MARGIN_BOTTOM, top + 20.0);
    let pts = || p.series.iter().flat_map(|ser| ser.points.iter().flatten());
    let xs = pts().map(|q| q.0).chain(p.arrows.iter().map(|a| a.x));
    let ys = pts().map(|q| q.1).chain(p.arrows.iter().map(|a| a.y)).chain(p.hline);
    let sx = Scale::new(xs, p.x.log, x0, x1);
    let sy = Scale::new(ys, p.y.log, y0, y1);

    let _ = writeln!(s, r#"<g class="panel" data-title="{}">"#, esc(&p.title));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
        x0,
        top + 12.0,
        esc(&p.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y0 - y1
    );
    for (px, label) in sx.ticks() {
        let _ = writeln!(
            s,
            r##"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10" fill="#444">{label}</text>"##,
            y0 + 14.0
        );
    }
    for (py, label) in sy.ticks() {
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10" fill="#444">{label}</text>"##,
            x0 - 4.0,
            py + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 32.0,
        esc(&axis_label(&p.x))
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        esc(&axis_label(&p.y))
    );
    if let Some(h) = p.hline.filter(|h| sy.visible(*h)) {
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            sy.map(h),
            sy.map(h)
        );
    }
    if !p.arrows.is_empty() {
        render_arrows(s, &p.arrows, &sx, &sy);
    }
    for (k, ser) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(s, r#"<g class="series" data-name="{}">"#, esc(&ser.name));
        if ser.style == Style::Line {
            for run in ser.points.split(|q| q.is_none_or(|(x, y)| !(sx.visible(x) && sy.visible(y)))) {
                if run.len() < 2 {
                    continue;
                }
                let coords: Vec<String> =
                    run.iter().flatten().map(|&(x, y)| format!("{:.2},{:.2}", sx.map(x), sy.map(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
        let r = if ser.style == Style::Line { 1.2 } else { 3.0 };
        for &(x, y) in ser.points.iter().flatten() {
            if !(sx.visible(x) && sy.visible(y)) {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{color}" data-x="{}" data-y="{}"/>"#,
                sx.map(x),
                sy.map(y),
                fmt_num(x),
                fmt_num(y)
            );
        }
        s.push_str("</g>\n");
    }
    if p.series.len() > 1 {
        for (k, ser) in p.series.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10" fill="{}">{}</text>"#,
                x1 - 6.0,
                y1 + 12.0 + 12.0 * k as f64,
                COLORS[k % COLORS.len()],
                esc(&ser.name)
            );
        }
    }
    s.push_str("</g>\n");
}

fn axis_label(a: &Axis) -> String {
    if a.log {
        format!("{} (log)", a.label)
    } else {
        a.label.clone()
    }
}

fn render_arrows(s: &mut String, arrows: &[Arrow], sx: &Scale, sy: &Scale) {
    let longest = arrows.iter().map(|a| a.u.hypot(a.v)).fold(0.0, f64::max);
    let n = (arrows.len() as f64).sqrt().max(1.0);
    let cell = ((sx.p1 - sx.p0) / n).min((sy.p0 - sy.p1) / n);
    let scale = if longest > 0.0 { 0.8 * cell / longest } else { 0.0 };
    s.push_str("<g class=\"arrows\">\n");
    for a in arrows {
        let (px, py) = (sx.map(a.x), sy.map(a.y));
        let (qx, qy) = (px + scale * a.u, py - scale * a.v);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{py:.2}" x2="{qx:.2}" y2="{qy:.2}" stroke="#888" data-x="{}" data-y="{}" data-u="{}" data-v="{}"/>"##,
            fmt_num(a.x),
            fmt_num(a.y),
            fmt_num(a.u),
            fmt_num(a.v)
        );
        let _ = writeln!(s, r##"<circle cx="{qx:.2}" cy="{qy:.2}" r="1.5" fill="#888"/>"##);
    }
    s.push_str("</g>\n");
}
