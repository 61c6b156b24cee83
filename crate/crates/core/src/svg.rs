//! Minimal SVG figures: pitch overlays and line charts.

use std::fmt::Write;

use crate::trajectory::FieldSpec;

pub const RED: &str = "#d62728";
pub const BLUE: &str = "#1f77b4";
pub const GREY: &str = "#7f7f7f";
pub const GREEN: &str = "#2ca02c";

/// Colours cycled through for multiple series.
pub const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

const MARGIN: f64 = 48.0;

#[derive(Debug, Clone)]
pub struct Figure {
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    title: String,
    body: String,
    legend: Vec<(String, String)>,
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.03 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Figure {
    pub fn new(width: f64, height: f64, x_range: (f64, f64), y_range: (f64, f64), title: &str) -> Self {
        Self {
            width,
            height,
            x_range,
            y_range,
            title: title.to_string(),
            body: String::new(),
            legend: Vec::new(),
        }
    }

    /// Figure spanning the data extent of `points`.
    pub fn fitted(width: f64, height: f64, points: impl IntoIterator<Item = (f64, f64)>, title: &str) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        Self::new(width, height, padded(x0, x1), padded(y0, y1), title)
    }

    /// Pitch drawn to scale with touchlines, halfway line and centre circle.
    pub fn pitch(field: &FieldSpec, width: f64, title: &str) -> Self {
        let plot_w = width - 2.0 * MARGIN;
        let height = plot_w * field.height() / field.width() + 2.0 * MARGIN;
        let mut fig = Self::new(width, height, (field.x_min, field.x_max), (field.y_min, field.y_max), title);
        let (x0, y0) = fig.px(field.x_min, field.y_max);
        let (x1, y1) = fig.px(field.x_max, field.y_min);
        let _ = write!(
            fig.body,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#f4faf4" stroke="{GREY}" stroke-width="1"/>"##,
            x1 - x0,
            y1 - y0
        );
        let mid = 0.5 * (field.x_min + field.x_max);
        fig.line((mid, field.y_min), (mid, field.y_max), GREY, 1.0);
        let (cx, cy) = fig.px(mid, 0.5 * (field.y_min + field.y_max));
        let r = 915.0 * (x1 - x0) / field.width();
        let _ = write!(fig.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="{GREY}" stroke-width="1"/>"#);
        fig
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let u = MARGIN + (x - x0) / (x1 - x0) * (self.width - 2.0 * MARGIN);
        let v = self.height - MARGIN - (y - y0) / (y1 - y0) * (self.height - 2.0 * MARGIN);
        (u, v)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, width: f64) {
        if points.len() < 2 {
            if let Some(&(x, y)) = points.first() {
                self.circle(x, y, width, color);
            }
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| {
                let (u, v) = self.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), color: &str, width: f64) {
        let (u0, v0) = self.px(a.0, a.1);
        let (u1, v1) = self.px(b.0, b.1);
        let _ = write!(
            self.body,
            r#"<line x1="{u0:.2}" y1="{v0:.2}" x2="{u1:.2}" y2="{v1:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    /// Line with a small head at `b`.
    pub fn arrow(&mut self, a: (f64, f64), b: (f64, f64), color: &str) {
        self.line(a, b, color, 1.0);
        let (u0, v0) = self.px(a.0, a.1);
        let (u1, v1) = self.px(b.0, b.1);
        let len = (u1 - u0).hypot(v1 - v0);
        if len < 1e-9 {
            return;
        }
        let (dx, dy) = ((u1 - u0) / len, (v1 - v0) / len);
        let head = 4.0f64.min(0.5 * len);
        let p1 = (u1 - head * (dx - 0.5 * dy), v1 - head * (dy + 0.5 * dx));
        let p2 = (u1 - head * (dx + 0.5 * dy), v1 - head * (dy - 0.5 * dx));
        let _ = write!(
            self.body,
            r#"<polygon points="{u1:.2},{v1:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            p1.0, p1.1, p2.0, p2.1
        );
    }

    /// Dot of radius `r` pixels.
    pub fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let (u, v) = self.px(x, y);
        let _ = write!(self.body, r#"<circle cx="{u:.2}" cy="{v:.2}" r="{r}" fill="{color}"/>"#);
    }

    /// Outlined axis-aligned rectangle in data coordinates.
    pub fn rect(&mut self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, color: &str) {
        let (u0, v0) = self.px(x_lo, y_hi);
        let (u1, v1) = self.px(x_hi, y_lo);
        let _ = write!(
            self.body,
            r#"<rect x="{u0:.2}" y="{v0:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.08" stroke="{color}" stroke-width="0.6"/>"#,
            (u1 - u0).max(0.0),
            (v1 - v0).max(0.0)
        );
    }

    pub fn legend(&mut self, label: &str, color: &str) {
        self.legend.push((label.to_string(), color.to_string()));
    }

    /// Ticks and labels on the left and bottom edges.
    pub fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let (l, b) = self.px(x0, y0);
        let (r, t) = self.px(x1, y1);
        let _ = write!(
            self.body,
            r#"<path d="M{l:.2},{t:.2} L{l:.2},{b:.2} L{r:.2},{b:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let (u, _) = self.px(fx, y0);
            let _ = write!(
                self.body,
                r#"<text x="{u:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
                b + 14.0,
                tick(fx)
            );
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let (_, v) = self.px(x0, fy);
            let _ = write!(
                self.body,
                r#"<text x="{:.2}" y="{v:.2}" font-size="10" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                l - 4.0,
                tick(fy)
            );
        }
        let _ = write!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            0.5 * (l + r),
            self.height - 10.0,
            escape(x_label)
        );
        let _ = write!(
            self.body,
            r#"<text x="12" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 12 {:.2})">{}</text>"#,
            0.5 * (t + b),
            0.5 * (t + b),
            escape(y_label)
        );
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
            w = self.width,
            h = self.height
        );
        let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = write!(
            out,
            r#"<text x="{:.2}" y="20" font-size="13" text-anchor="middle">{}</text>"#,
            0.5 * self.width,
            escape(&self.title)
        );
        out.push_str(&self.body);
        for (i, (label, color)) in self.legend.iter().enumerate() {
            let y = 34.0 + 14.0 * i as f64;
            let x = self.width - MARGIN - 120.0;
            let _ = write!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{y:.2}" font-size="10" dominant-baseline="hanging">{}</text>"#,
                y,
                x + 14.0,
                escape(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_elements() {
        let mut fig = Figure::pitch(&FieldSpec::default(), 800.0, "tracks & <predictions>");
        fig.polyline(&[(0.0, 0.0), (100.0, 50.0)], RED, 1.5);
        fig.rect(-10.0, 10.0, -5.0, 5.0, BLUE);
        fig.arrow((0.0, 0.0), (300.0, 0.0), GREEN);
        fig.legend("truth", RED);
        let svg = fig.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("&amp; &lt;predictions&gt;"));
    }

    #[test]
    fn fitted_handles_empty() {
        let mut fig = Figure::fitted(400.0, 300.0, Vec::new(), "empty");
        fig.axes("t", "v");
        assert!(fig.render().contains("</svg>"));
    }
}
