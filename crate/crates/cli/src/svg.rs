//! Minimal SVG plots of point sets and curves in the complex plane.

use std::fmt::Write;

use specflow::C64;

const SIZE: f64 = 640.0;
const PAD: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

enum Layer {
    Line { points: Vec<C64>, closed: bool, color: usize },
    Dots { points: Vec<C64>, color: &'static str, radius: f64 },
}

pub struct Plot {
    title: String,
    layers: Vec<Layer>,
    bounds: Option<(f64, f64, f64, f64)>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            layers: Vec::new(),
            bounds: None,
        }
    }

    /// Fixes the viewport instead of fitting it to the data.
    pub fn bounds(mut self, x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        self.bounds = Some((x0, x1, y0, y1));
        self
    }

    pub fn line(&mut self, points: Vec<C64>, closed: bool, color: usize) {
        self.layers.push(Layer::Line { points, closed, color });
    }

    pub fn dots(&mut self, points: Vec<C64>, color: &'static str, radius: f64) {
        self.layers.push(Layer::Dots { points, color, radius });
    }

    fn fit(&self) -> (f64, f64, f64, f64) {
        if let Some(b) = self.bounds {
            return b;
        }
        let all = self.layers.iter().flat_map(|l| match l {
            Layer::Line { points, .. } | Layer::Dots { points, .. } => points.iter(),
        });
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in all.filter(|z| z.re.is_finite() && z.im.is_finite()) {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if !x0.is_finite() {
            return (-1.0, 1.0, -1.0, 1.0);
        }
        // square viewport so angles are preserved
        let half = ((x1 - x0).max(y1 - y0) / 2.0).max(1e-9) * 1.05;
        let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        (cx - half, cx + half, cy - half, cy + half)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.fit();
        let inner = SIZE - 2.0 * PAD;
        let map = |z: &C64| {
            (
                PAD + (z.re - x0) / (x1 - x0) * inner,
                SIZE - PAD - (z.im - y0) / (y1 - y0) * inner,
            )
        };
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r##"<rect x="{PAD}" y="{PAD}" width="{inner}" height="{inner}" fill="none" stroke="#999"/>"##
        );
        if x0 < 0.0 && x1 > 0.0 {
            let (px, _) = map(&C64::new(0.0, 0.0));
            let _ = writeln!(s, r##"<line x1="{px:.2}" y1="{PAD}" x2="{px:.2}" y2="{}" stroke="#ccc"/>"##, SIZE - PAD);
        }
        if y0 < 0.0 && y1 > 0.0 {
            let (_, py) = map(&C64::new(0.0, 0.0));
            let _ = writeln!(s, r##"<line x1="{PAD}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ccc"/>"##, SIZE - PAD);
        }
        for layer in &self.layers {
            match layer {
                Layer::Line { points, closed, color } => {
                    let pts: Vec<String> = points
                        .iter()
                        .map(|z| {
                            let (px, py) = map(z);
                            format!("{px:.2},{py:.2}")
                        })
                        .collect();
                    let tag = if *closed { "polygon" } else { "polyline" };
                    let _ = writeln!(
                        s,
                        r#"<{tag} points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#,
                        pts.join(" "),
                        PALETTE[color % PALETTE.len()]
                    );
                }
                Layer::Dots { points, color, radius } => {
                    for z in points {
                        let (px, py) = map(z);
                        let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{radius}" fill="{color}"/>"#);
                    }
                }
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="14">{}</text>"#,
            PAD - 12.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">Re [{x0:.3}, {x1:.3}]  Im [{y0:.3}, {y1:.3}]</text>"#,
            SIZE - PAD + 20.0
        );
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
