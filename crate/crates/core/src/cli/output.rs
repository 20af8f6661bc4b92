//! CSV rows and self-rendered SVG line charts.

use std::fmt::Write as _;

use crate::probabilities::{ChannelSpec, ProbabilityPoint};

pub const CSV_HEADER: &str = "w0_over_r0,value,raw,channel,delta_l";

/// CSV text for one curve. Floats use the shortest representation that
/// parses back to the same value.
pub fn curve_csv(ch: &ChannelSpec, points: &[ProbabilityPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let label = ch.label();
    for p in points {
        let _ = writeln!(s, "{},{},{},{},{}", p.w0_over_r0, p.value, p.raw, label, ch.delta_l());
    }
    s
}

/// One CSV row parsed back.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub w0_over_r0: f64,
    pub value: f64,
    pub raw: f64,
    pub channel: String,
    pub delta_l: i32,
}

pub fn parse_csv(text: &str) -> Option<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next()? != CSV_HEADER {
        return None;
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return None;
            }
            Some(CsvRow {
                w0_over_r0: f[0].parse().ok()?,
                value: f[1].parse().ok()?,
                raw: f[2].parse().ok()?,
                channel: f[3].to_string(),
                delta_l: f[4].parse().ok()?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draw point markers (sparse series) in addition to the lines.
    pub markers: bool,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const DASHES: [&str; 4] = ["", "8 5", "2 4", "10 4 2 4"];

/// Ticks at 1, 2 or 5 times a power of ten covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    pub fn render(&self) -> String {
        let all = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y1) = (0.0, 1.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        y1 *= 1.05;
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{t}</text>"#,
                b = TOP + ph,
                b2 = TOP + ph + 5.0,
                ty = TOP + ph + 18.0,
                t = fmt_tick(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{l2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{t}</text>"#,
                l2 = LEFT - 5.0,
                tx = LEFT - 8.0,
                ty = y + 4.0,
                t = fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{cy}" text-anchor="middle" transform="rotate(-90 16 {cy})">{}</text>"#,
            escape(&self.y_label),
            cy = TOP + ph / 2.0
        );
        for (i, ser) in self.series.iter().enumerate() {
            let dash = DASHES[i % DASHES.len()];
            let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="black" stroke-width="1.5"{dash_attr} points="{}"/>"#,
                pts.join(" ")
            );
            if self.markers {
                for &(x, y) in &ser.points {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, sx(x), sy(y));
                }
            }
            let ly = TOP + 16.0 + 16.0 * i as f64;
            let lx = LEFT + pw - 190.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="black" stroke-width="1.5"{dash_attr}/><text x="{}" y="{}">{}</text>"#,
                lx + 28.0,
                lx + 34.0,
                ly + 4.0,
                escape(&ser.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(t: f64) -> String {
    let r = (t * 1e9).round() / 1e9;
    format!("{r}")
}
