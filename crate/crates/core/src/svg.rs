//! SVG 1.1 contact sheet of fragmented strokes: one cell per stroke, one path
//! per segment coloured by its kind, segment points drawn as small circles.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::fit::{fit_circle, fit_line};
use crate::fragment::{Fragmentation, PrimitiveKind};
use crate::geometry::{Point2, RawStroke};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvgStyle {
    /// Side of one square cell, in pixels.
    pub cell: f64,
    pub columns: usize,
    pub margin: f64,
    /// Colour of line segments, indexed by direction sector.
    pub line_colors: [String; 8],
    pub arc_cw_color: String,
    pub arc_ccw_color: String,
    pub point_color: String,
    pub stroke_width: f64,
    pub point_radius: f64,
    /// Input uses y-up coordinates and must be flipped for display.
    pub y_up: bool,
    /// Overlay the least-squares line or circle of every segment, dashed.
    pub fitted: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        // lines spread over the hue circle in darker tones, arcs in two fixed colours
        let line_colors = [0, 45, 90, 135, 180, 225, 270, 315].map(|h| format!("hsl({h},70%,40%)"));
        Self {
            cell: 220.0,
            columns: 4,
            margin: 18.0,
            line_colors,
            arc_cw_color: "#d62728".into(),
            arc_ccw_color: "#1f77b4".into(),
            point_color: "#000000".into(),
            stroke_width: 2.0,
            point_radius: 3.5,
            y_up: false,
            fitted: false,
        }
    }
}

impl SvgStyle {
    pub fn color(&self, kind: PrimitiveKind) -> &str {
        match kind {
            PrimitiveKind::Line { direction } => &self.line_colors[direction as usize % 8],
            PrimitiveKind::ArcCw => &self.arc_cw_color,
            PrimitiveKind::ArcCcw => &self.arc_ccw_color,
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Maps stroke coordinates into one cell, preserving aspect ratio.
struct CellMap {
    ox: f64,
    oy: f64,
    min: Point2<f64>,
    max_y: f64,
    scale: f64,
    y_up: bool,
}

impl CellMap {
    fn new(points: &[Point2<f64>], ox: f64, oy: f64, style: &SvgStyle) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let inner = style.cell - 2.0 * style.margin;
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        Self { ox: ox + style.margin, oy: oy + style.margin, min: lo, max_y: hi.y, scale: inner / span, y_up: style.y_up }
    }

    fn map(&self, p: Point2<f64>) -> (f64, f64) {
        let y = if self.y_up { self.max_y - p.y } else { p.y - self.min.y };
        (self.ox + (p.x - self.min.x) * self.scale, self.oy + y * self.scale)
    }
}

fn path_data(cell: &CellMap, points: &[Point2<f64>]) -> String {
    let mut d = String::new();
    for (i, &p) in points.iter().enumerate() {
        let (x, y) = cell.map(p);
        let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
    }
    d
}

fn fitted_overlay(out: &mut String, cell: &CellMap, pts: &[Point2<f64>], kind: PrimitiveKind, color: &str) {
    let dash = "stroke-dasharray=\"4,3\" stroke-width=\"1\" fill=\"none\"";
    if kind.is_arc() {
        if let Some(c) = fit_circle(pts) {
            let a0 = (pts[0] - c.center).y.atan2((pts[0] - c.center).x);
            let mut prev = a0;
            let mut sweep = 0.0;
            for p in &pts[1..] {
                let a = (*p - c.center).y.atan2((*p - c.center).x);
                let mut da = a - prev;
                da -= std::f64::consts::TAU * (da / std::f64::consts::TAU).round();
                sweep += da;
                prev = a;
            }
            let samples: Vec<Point2<f64>> = (0..=48)
                .map(|i| {
                    let a = a0 + sweep * i as f64 / 48.0;
                    Point2::new(c.center.x + c.radius * a.cos(), c.center.y + c.radius * a.sin())
                })
                .collect();
            let coords: Vec<String> = samples.iter().map(|&p| cell.map(p)).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, "<polyline points=\"{}\" stroke=\"{color}\" {dash}/>", coords.join(" "));
        }
    } else if let Some(l) = fit_line(pts) {
        let project = |p: Point2<f64>| l.centroid + l.direction * (p - l.centroid).dot(l.direction);
        let (x1, y1) = cell.map(project(pts[0]));
        let (x2, y2) = cell.map(project(pts[pts.len() - 1]));
        let _ = writeln!(out, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\" {dash}/>");
    }
}

/// Renders strokes with their fragmentations on a grid.
pub fn render_sheet<T: Scalar>(items: &[(&RawStroke<T>, &Fragmentation<T>)], style: &SvgStyle) -> String {
    let columns = style.columns.max(1);
    let rows = items.len().div_ceil(columns).max(1);
    let width = style.cell * columns.min(items.len().max(1)) as f64;
    let height = style.cell * rows as f64;
    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    for (n, (stroke, frag)) in items.iter().enumerate() {
        let (ox, oy) = ((n % columns) as f64 * style.cell, (n / columns) as f64 * style.cell);
        let pts: Vec<Point2<f64>> = (0..stroke.len()).map(|i| stroke.xy(i).cast()).collect();
        let cell = CellMap::new(&pts, ox, oy, style);
        let _ = writeln!(out, "<g id=\"stroke-{n}\">");
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">{}</text>",
            ox + 4.0,
            oy + 12.0,
            escape(stroke.id())
        );
        for seg in &frag.segments {
            let part = &pts[seg.raw_start..=seg.raw_end.min(pts.len() - 1)];
            let color = style.color(seg.kind);
            let _ = writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\"><title>{}</title></path>",
                path_data(&cell, part),
                style.stroke_width,
                seg.kind
            );
            if style.fitted {
                fitted_overlay(&mut out, &cell, part, seg.kind, color);
            }
        }
        for &i in &frag.segment_points {
            let (x, y) = cell.map(pts[i]);
            let _ = writeln!(
                out,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
                style.point_radius, style.point_color
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::Segment;
    use crate::hmm::StatePath;

    fn l_stroke() -> (RawStroke<f64>, Fragmentation<f64>) {
        let mut pts: Vec<Point2<f64>> = (0..=10).map(|i| Point2::new(0.0, i as f64)).collect();
        pts.extend((1..=10).map(|i| Point2::new(i as f64, 10.0)));
        let stroke = RawStroke::from_xy("l <1>", &pts).unwrap();
        let seg = |kind, a, b| Segment { kind, raw_start: a, raw_end: b, resampled_range: (a, b) };
        let frag = Fragmentation {
            segments: vec![seg(PrimitiveKind::Line { direction: 6 }, 0, 10), seg(PrimitiveKind::Line { direction: 0 }, 10, 20)],
            segment_points: vec![10],
            candidates: vec![10],
            path: StatePath { states: vec![], log_score: 0.0 },
            step_d: 1.0,
        };
        (stroke, frag)
    }

    #[test]
    fn one_path_per_segment_and_one_circle_per_point() {
        let (stroke, frag) = l_stroke();
        let svg = render_sheet(&[(&stroke, &frag)], &SvgStyle::default());
        assert_eq!(svg.matches("<path ").count(), 2);
        assert_eq!(svg.matches("<circle ").count(), 1);
        assert!(svg.contains("l &lt;1&gt;"));
        assert!(svg.contains(&SvgStyle::default().line_colors[6]));
    }

    #[test]
    fn fitted_overlay_adds_no_paths() {
        let (stroke, frag) = l_stroke();
        let style = SvgStyle { fitted: true, ..SvgStyle::default() };
        let svg = render_sheet(&[(&stroke, &frag)], &style);
        assert_eq!(svg.matches("<path ").count(), 2);
        assert_eq!(svg.matches("<line ").count(), 2);
    }
}
