//! Static SVG scatter of the second-order spectrum with band and enclosure
//! overlays. Output is deterministic: points keep their spectrum order and
//! every coordinate is printed with two decimals.

use crate::config::Window;
use gapspec_core::bands::BandStructure;
use gapspec_core::certify::Enclosure;
use gapspec_core::matpoly::SpectrumPoint;
use std::fmt::Write;

pub const WIDTH: f64 = 900.0;
pub const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 45.0;
const TICKS: usize = 5;

struct Frame {
    w: Window,
}

impl Frame {
    fn x(&self, re: f64) -> f64 {
        LEFT + (re - self.w.re[0]) / (self.w.re[1] - self.w.re[0]) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, im: f64) -> f64 {
        TOP + (self.w.im[1] - im) / (self.w.im[1] - self.w.im[0]) * (HEIGHT - TOP - BOTTOM)
    }

    /// Height of the real axis, pinned to the frame when `Im = 0` is off-window.
    fn axis_y(&self) -> f64 {
        self.y(0.0f64.clamp(self.w.im[0], self.w.im[1]))
    }

    fn clip(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let (a, b) = (lo.max(self.w.re[0]), hi.min(self.w.re[1]));
        (a <= b).then_some((a, b))
    }
}

/// Points of `points` drawn by [`render_scatter`]: those in the closed window.
pub fn visible_points<'a>(points: &'a [SpectrumPoint], window: &'a Window) -> impl Iterator<Item = &'a SpectrumPoint> + 'a {
    points.iter().filter(move |p| window.contains(p.mu.re, p.mu.im))
}

pub fn render_scatter(points: &[SpectrumPoint], bands: &BandStructure, enclosures: &[Enclosure], window: &Window) -> String {
    let f = Frame { w: *window };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    s.push_str(
        "<style>.frame{fill:none;stroke:#333}.axis{stroke:#999;stroke-dasharray:4 3}\
         .band{stroke:#d62728;stroke-width:6;stroke-opacity:0.45}\
         .enclosure{stroke:#2ca02c;stroke-width:2}.pt{fill:#1f77b4}\
         text{font-family:sans-serif;font-size:11px;fill:#333}</style>\n",
    );
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
        LEFT,
        TOP,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );

    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let re = window.re[0] + t * (window.re[1] - window.re[0]);
        let im = window.im[0] + t * (window.im[1] - window.im[0]);
        let (x, y) = (f.x(re), f.y(im));
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{re:.3}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{im:.3}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Re μ</text><text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">Im μ</text>"#,
        LEFT + 0.5 * (WIDTH - LEFT - RIGHT),
        HEIGHT - 6.0,
        TOP + 0.5 * (HEIGHT - TOP - BOTTOM),
        TOP + 0.5 * (HEIGHT - TOP - BOTTOM)
    );
    if (window.im[0]..=window.im[1]).contains(&0.0) {
        let y = f.y(0.0);
        let _ = writeln!(s, r#"<line class="axis" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, f.x(window.re[0]), f.x(window.re[1]));
    }

    let y0 = f.axis_y();
    s.push_str("<g class=\"bands\">\n");
    for b in bands.bands() {
        if let Some((lo, hi)) = f.clip(b.lower, b.upper.unwrap_or(f64::INFINITY)) {
            let _ = writeln!(s, r#"<line class="band" x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}"/>"#, f.x(lo), f.x(hi));
        }
    }
    s.push_str("</g>\n<g class=\"enclosures\">\n");
    for e in enclosures {
        if let Some((lo, hi)) = f.clip(e.lower(), e.upper()) {
            let (x1, x2) = (f.x(lo), f.x(hi));
            let _ = writeln!(
                s,
                r#"<path class="enclosure" d="M{x1:.2} {:.2}V{:.2}M{x1:.2} {y0:.2}H{x2:.2}M{x2:.2} {:.2}V{:.2}"/>"#,
                y0 - 6.0,
                y0 + 6.0,
                y0 - 6.0,
                y0 + 6.0
            );
        }
    }
    s.push_str("</g>\n<g class=\"points\">\n");
    for p in visible_points(points, window) {
        let _ = writeln!(s, r#"<circle class="pt" cx="{:.2}" cy="{:.2}" r="2.5"/>"#, f.x(p.mu.re), f.y(p.mu.im));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
