//! Minimal static SVG plotting: scatter points plus optional fitted line on
//! linear axes (callers pass already-transformed coordinates, e.g. logs).
//! No dependencies, deterministic output — floats are written with fixed
//! precision so identical data gives identical bytes.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 70.0; // left margin
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 55.0;

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// optional straight line y = a + b·x drawn across the data range
    pub line: Option<(f64, f64)>,
    /// optional annotation placed under the title
    pub note: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Evenly spaced ticks covering [lo, hi].
fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    (0..=n).map(|i| lo + span * i as f64 / n as f64).collect()
}

impl Figure {
    pub fn render(&self) -> String {
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &self.points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        if self.points.is_empty() {
            x_lo = 0.0;
            x_hi = 1.0;
            y_lo = 0.0;
            y_hi = 1.0;
        }
        if x_hi - x_lo <= 0.0 {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if y_hi - y_lo <= 0.0 {
            y_lo -= 0.5;
            y_hi += 0.5;
        }
        // 5% breathing room
        let (xp, yp) = ((x_hi - x_lo) * 0.05, (y_hi - y_lo) * 0.05);
        x_lo -= xp;
        x_hi += xp;
        y_lo -= yp;
        y_hi += yp;

        let px = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
        let py = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
        );
        let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"22\" font-family=\"monospace\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            fmt(W / 2.0),
            esc(&self.title)
        );
        if !self.note.is_empty() {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"36\" font-family=\"monospace\" font-size=\"11\" fill=\"#555\" text-anchor=\"middle\">{}</text>",
                fmt(W / 2.0),
                esc(&self.note)
            );
        }

        // axes box + grid + ticks
        let _ = writeln!(
            s,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            fmt(ML),
            fmt(MT),
            fmt(W - ML - MR),
            fmt(H - MT - MB)
        );
        for t in ticks(x_lo, x_hi, 5) {
            let x = px(t);
            let _ = writeln!(
                s,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>",
                fmt(x),
                fmt(MT),
                fmt(H - MB)
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                fmt(x),
                fmt(H - MB + 16.0),
                tick_label(t)
            );
        }
        for t in ticks(y_lo, y_hi, 5) {
            let y = py(t);
            let _ = writeln!(
                s,
                "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#ddd\"/>",
                fmt(y),
                fmt(ML),
                fmt(W - MR)
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                fmt(ML - 6.0),
                fmt(y + 4.0),
                tick_label(t)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            fmt((ML + W - MR) / 2.0),
            fmt(H - 12.0),
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            fmt((MT + H - MB) / 2.0),
            fmt((MT + H - MB) / 2.0),
            esc(&self.y_label)
        );

        if let Some((a, b)) = self.line {
            let y1 = a + b * x_lo;
            let y2 = a + b * x_hi;
            let _ = writeln!(
                s,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c44\" stroke-width=\"1.5\"/>",
                fmt(px(x_lo)),
                fmt(py(y1.clamp(y_lo, y_hi))),
                fmt(px(x_hi)),
                fmt(py(y2.clamp(y_lo, y_hi)))
            );
        }
        for &(x, y) in &self.points {
            let _ = writeln!(
                s,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#246\" fill-opacity=\"0.8\"/>",
                fmt(px(x)),
                fmt(py(y))
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
