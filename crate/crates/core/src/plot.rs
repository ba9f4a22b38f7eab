//! Static SVG rendering of discrimination lines.
//!
//! The plotting region is the unit square with `c_x` on the horizontal axis
//! and `c_y` on the vertical one. Crossings are drawn as polylines, broken
//! wherever a grid point has no crossing. Grid points where one series is
//! always preferred get a marker on the edge of the square: bottom when the
//! y series wins, top when the x series wins, and a vertical bar for ties
//! over the whole range.

use std::fmt::Write as _;

use crate::discrimination::{LinePoint, Preference};

const SIZE: f64 = 420.0;
const LEFT: f64 = 64.0;
const TOP: f64 = 48.0;
const WIDTH: f64 = LEFT + SIZE + 180.0;
const HEIGHT: f64 = TOP + SIZE + 56.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotLine {
    pub label: String,
    pub points: Vec<LinePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotDocument {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<PlotLine>,
}

impl PlotDocument {
    pub fn new(title: impl Into<String>) -> Self {
        PlotDocument {
            title: title.into(),
            x_label: "c_x (x series: drop in all classes)".into(),
            y_label: "c_y (y series: drop in class 1)".into(),
            lines: Vec::new(),
        }
    }

    pub fn with_line(mut self, label: impl Into<String>, points: Vec<LinePoint>) -> Self {
        self.lines.push(PlotLine {
            label: label.into(),
            points,
        });
        self
    }
}

fn sx(c: f64) -> f64 {
    LEFT + c.clamp(0.0, 1.0) * SIZE
}

fn sy(c: f64) -> f64 {
    TOP + (1.0 - c.clamp(0.0, 1.0)) * SIZE
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(doc: &PlotDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + SIZE / 2.0,
        escape(&doc.title)
    );

    // axes and ticks
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{SIZE}" height="{SIZE}" fill="none" stroke="#333"/>"##
    );
    for t in 0..=5 {
        let v = t as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{b2:.2}" stroke="#333"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{v:.1}</text>"##,
            x = sx(v),
            b = sy(0.0),
            b2 = sy(0.0) + 5.0,
            ty = sy(0.0) + 18.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{l:.2}" y1="{y:.2}" x2="{l2:.2}" y2="{y:.2}" stroke="#333"/><text x="{tx:.2}" y="{yy:.2}" text-anchor="end">{v:.1}</text>"##,
            l = sx(0.0) - 5.0,
            l2 = sx(0.0),
            y = sy(v),
            tx = sx(0.0) - 8.0,
            yy = sy(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + SIZE / 2.0,
        TOP + SIZE + 40.0,
        escape(&doc.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + SIZE / 2.0,
        escape(&doc.y_label)
    );
    let _ = writeln!(
        s,
        r##"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    );

    for (n, line) in doc.lines.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="line" stroke="{color}" fill="{color}">"#);
        for segment in crossing_segments(&line.points) {
            let pts: Vec<String> = segment
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            if pts.len() == 1 {
                let (x, y) = segment[0];
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, sx(x), sy(y));
            } else {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke-width="2" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        for pt in line.points.iter().filter(|p| !p.crossing) {
            match pt.preference {
                Some(Preference::Second) => {
                    let _ = writeln!(
                        s,
                        r#"<circle class="prefers-y" cx="{:.2}" cy="{:.2}" r="2.5" fill-opacity="0.5"/>"#,
                        sx(pt.c_x),
                        sy(0.0)
                    );
                }
                Some(Preference::First) => {
                    let _ = writeln!(
                        s,
                        r#"<circle class="prefers-x" cx="{:.2}" cy="{:.2}" r="2.5" fill-opacity="0.5"/>"#,
                        sx(pt.c_x),
                        sy(1.0)
                    );
                }
                Some(Preference::Tie) => {
                    let _ = writeln!(
                        s,
                        r#"<line class="tie" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke-width="2"/>"#,
                        sy(0.0),
                        sy(1.0),
                        x = sx(pt.c_x)
                    );
                }
                None => {}
            }
        }
        let ly = TOP + 14.0 + 18.0 * n as f64;
        let lx = LEFT + SIZE + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke-width="2"/><text x="{:.2}" y="{:.2}" stroke="none">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&line.label)
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Runs of consecutive crossing points.
fn crossing_segments(points: &[LinePoint]) -> Vec<Vec<(f64, f64)>> {
    let mut segments = Vec::new();
    let mut current = Vec::new();
    for pt in points {
        match pt.c_y {
            Some(cy) if pt.crossing => current.push((pt.c_x, cy)),
            _ => {
                if !current.is_empty() {
                    segments.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}
